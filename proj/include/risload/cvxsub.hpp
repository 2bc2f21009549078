// SPDX-License-Identifier: Apache-2.0
#pragma once

// Convex single-cell subproblems in one real-valued canonical form, and a
// primal log-barrier interior-point solver for them.
//
// Variables x: local phases as interleaved (re, im) pairs, then auxiliary
// variables. Auxiliaries are stored relative to the expansion point
// (gamma = gamma_scale * x, ...), which keeps all of them O(1) even when
// interference powers are ~1e-13 W.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "risload/coupling.hpp"
#include "risload/error.hpp"

namespace risload {

enum class ConstraintTag { Interference, MajorizedSinr, PowerBound, AuxPositive, UnitDisc };
enum class SubproblemKind { Generic, P23, P25, P31 };
enum class InterferenceMode { Zero, WorstCase };
enum class SolveStatus { Optimal, MaxIter, Infeasible };

/// Weight in beta*gamma = ((w beta + gamma/w)^2 - (w beta - gamma/w)^2) / 4
/// before the concave square is linearized. Literal uses w = 1; Balanced
/// picks w = sqrt(gamma~/beta~), which equalizes both products at the
/// expansion point.
enum class MajorizerWeighting { Literal, Balanced };

inline const char* to_string(ConstraintTag t) {
    switch (t) {
        case ConstraintTag::Interference: return "interference";
        case ConstraintTag::MajorizedSinr: return "majorized_sinr";
        case ConstraintTag::PowerBound: return "power_bound";
        case ConstraintTag::AuxPositive: return "aux_positive";
        case ConstraintTag::UnitDisc: return "unit_disc";
    }
    return "?";
}

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

/// f(x) = ||rows * x[offset : offset + rows.cols()] + shift||^2 + linear . x + constant <= 0
struct QuadraticConstraint {
    ConstraintTag tag = ConstraintTag::AuxPositive;
    int ue = -1;
    int offset = 0;
    Eigen::MatrixXd rows;
    Eigen::VectorXd shift;
    Eigen::VectorXd linear;
    double constant = 0.0;
    /// Multiply the value by this to recover the unnormalized constraint.
    double scale = 1.0;

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
        return rows * x.segment(offset, rows.cols()) + shift;
    }
    double value(const Eigen::VectorXd& x) const {
        double v = linear.dot(x) + constant;
        if (rows.rows() > 0) v += residual(x).squaredNorm();
        return v;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = linear;
        if (rows.rows() > 0) g.segment(offset, rows.cols()) += 2.0 * rows.transpose() * residual(x);
        return g;
    }
};

/// Objective term d / log2(1 + gain * x[index]).
struct RateTerm {
    int index = 0;
    double demand = 0.0;
    double gain = 1.0;
};

struct ExpansionPoint {
    Eigen::VectorXcd phi;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
};

struct ConvexSubproblem {
    SubproblemKind kind = SubproblemKind::Generic;
    int Q = 0;  // complex phase variables
    int T = 0;  // UEs
    int n = 0;  // real variables
    std::vector<RateTerm> rates;
    Eigen::VectorXd linear;
    double constant = 0.0;
    std::vector<QuadraticConstraint> quads;
    bool unit_disc = true;
    Eigen::VectorXd expansion;
    Eigen::VectorXd gamma_scale;  // P2.x: gamma; P3.1: y
    Eigen::VectorXd beta_scale;
    Eigen::VectorXd upsilon;      // P3.1 frozen interference
    double penalty = 0.0;
    double weight_omega_hint = 0.0;

    int num_constraints() const { return static_cast<int>(quads.size()) + (unit_disc ? Q : 0); }
    int aux_stride() const { return kind == SubproblemKind::P31 ? 1 : 2; }

    double objective(const Eigen::VectorXd& x) const {
        double v = linear.dot(x) + constant;
        for (const RateTerm& r : rates)
            if (r.demand != 0.0) v += r.demand / std::log2(1.0 + r.gain * x[r.index]);
        return v;
    }
    /// All constraint values, quadratics first then unit discs.
    Eigen::VectorXd constraint_values(const Eigen::VectorXd& x) const {
        Eigen::VectorXd f(num_constraints());
        for (std::size_t i = 0; i < quads.size(); ++i) f[i] = quads[i].value(x);
        if (unit_disc)
            for (int m = 0; m < Q; ++m)
                f[quads.size() + m] = x[2 * m] * x[2 * m] + x[2 * m + 1] * x[2 * m + 1] - 1.0;
        return f;
    }
    Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(num_constraints(), n);
        for (std::size_t i = 0; i < quads.size(); ++i) J.row(i) = quads[i].gradient(x).transpose();
        if (unit_disc)
            for (int m = 0; m < Q; ++m) {
                J(quads.size() + m, 2 * m) = 2.0 * x[2 * m];
                J(quads.size() + m, 2 * m + 1) = 2.0 * x[2 * m + 1];
            }
        return J;
    }
    Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = linear;
        for (const RateTerm& r : rates) {
            if (r.demand == 0.0) continue;
            const double u = 1.0 + r.gain * x[r.index];
            const double L = std::log(u);
            g[r.index] -= r.demand * std::numbers::ln2 * r.gain / (u * L * L);
        }
        return g;
    }

    Eigen::VectorXcd phi_of(const Eigen::VectorXd& x) const {
        Eigen::VectorXcd phi(Q);
        for (int m = 0; m < Q; ++m) phi[m] = cplx(x[2 * m], x[2 * m + 1]);
        return phi;
    }
    Eigen::VectorXd aux_of(const Eigen::VectorXd& x, int slot) const {
        Eigen::VectorXd v(T);
        const Eigen::VectorXd& sc = slot == 0 ? gamma_scale : beta_scale;
        for (int t = 0; t < T; ++t) v[t] = sc[t] * x[2 * Q + aux_stride() * t + slot];
        return v;
    }
};

struct SubproblemSolution {
    Eigen::VectorXd x;
    Eigen::VectorXcd phi;
    Eigen::VectorXd gamma;  // P3.1: y
    Eigen::VectorXd beta;   // empty for P3.1
    double objective_value = 0.0;
    double expansion_objective = 0.0;
    double kkt_residual = 0.0;
    double max_violation = 0.0;
    SolveStatus status = SolveStatus::Optimal;
    int newton_steps = 0;
    bool used_phase1 = false;
    bool kept_expansion = false;
};

struct SolverOptions {
    double tol = 1e-7;       // KKT residual target
    double t0 = 1.0;         // initial inverse barrier weight
    double growth = 10.0;    // t <- growth * t per stage
    int max_newton = 600;    // total Newton steps across stages
    bool verify = false;     // re-check constraints (and exact KKT) at return
};

struct AssemblyOptions {
    MajorizerWeighting weighting = MajorizerWeighting::Balanced;
};

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace detail {

inline void check_point(const CellContext& ctx, const ExpansionPoint& p, bool needs_aux) {
    if (p.phi.size() != ctx.Q) throw std::invalid_argument("expansion phases have wrong length");
    if (!needs_aux) return;
    if (p.gamma.size() != ctx.T || p.beta.size() != ctx.T)
        throw std::invalid_argument("expansion gamma/beta have wrong length");
    for (int t = 0; t < ctx.T; ++t) {
        if (!(p.gamma[t] > 0.0)) throw std::invalid_argument("expansion gamma must be > 0");
        if (!(p.beta[t] > ctx.noise * (1.0 - 1e-9))) throw std::invalid_argument("expansion beta below noise");
    }
}

inline void put_phases(Eigen::VectorXd& x, const Eigen::VectorXcd& phi) {
    for (Eigen::Index m = 0; m < phi.size(); ++m) {
        x[2 * m] = phi[m].real();
        x[2 * m + 1] = phi[m].imag();
    }
}

/// Real coefficients (re, im) of Re{c * (x_re + i x_im)} for each entry of row * c.
inline void add_real_part(Eigen::VectorXd& lin, const Eigen::RowVectorXcd& row, cplx c, double w) {
    for (Eigen::Index m = 0; m < row.size(); ++m) {
        const cplx v = c * row[m];
        lin[2 * m] += w * v.real();
        lin[2 * m + 1] -= w * v.imag();
    }
}

/// Rows of |known + row * phi|^2 lifted to reals, scaled by `s`.
inline void lift_modulus(Eigen::MatrixXd& R, Eigen::VectorXd& shift, Eigen::Index r, const Eigen::RowVectorXcd& row,
                         cplx known, double s) {
    for (Eigen::Index m = 0; m < row.size(); ++m) {
        R(r, 2 * m) = s * row[m].real();
        R(r, 2 * m + 1) = -s * row[m].imag();
        R(r + 1, 2 * m) = s * row[m].imag();
        R(r + 1, 2 * m + 1) = s * row[m].real();
    }
    shift[r] = s * known.real();
    shift[r + 1] = s * known.imag();
}

inline QuadraticConstraint interference_constraint(const CellContext& ctx, int t, double beta_scale,
                                                   int beta_index, int n) {
    QuadraticConstraint q;
    q.tag = ConstraintTag::Interference;
    q.ue = t;
    int active = 0;
    for (int k = 0; k < ctx.K(); ++k) active += ctx.weights[k] > 0.0;
    q.rows = Eigen::MatrixXd::Zero(2 * active, 2 * ctx.Q);
    q.shift = Eigen::VectorXd::Zero(2 * active);
    int r = 0;
    for (int k = 0; k < ctx.K(); ++k) {
        if (!(ctx.weights[k] > 0.0)) continue;
        lift_modulus(q.rows, q.shift, r, ctx.cross_rows[t].row(k), ctx.cross_known(t, k),
                     std::sqrt(ctx.weights[k] / beta_scale));
        r += 2;
    }
    q.linear = Eigen::VectorXd::Zero(n);
    q.linear[beta_index] = -1.0;
    q.constant = ctx.noise / beta_scale;
    q.scale = beta_scale;
    return q;
}

inline QuadraticConstraint aux_positive(int index, int ue, int n) {
    QuadraticConstraint q;
    q.tag = ConstraintTag::AuxPositive;
    q.ue = ue;
    q.rows.resize(0, 0);
    q.linear = Eigen::VectorXd::Zero(n);
    q.linear[index] = -1.0;
    return q;
}

inline double majorizer_omega(double gamma, double beta, MajorizerWeighting w) {
    return w == MajorizerWeighting::Balanced ? std::sqrt(gamma / beta) : 1.0;
}

}  // namespace detail

/// Convex problem in (phi, gamma, beta): minimize the cell load subject to
/// the interference bound and the majorized SINR constraint per UE, plus
/// unit-disc constraints on the local phases.
inline ConvexSubproblem assemble_p23(const CellContext& ctx, const ExpansionPoint& point,
                                     const AssemblyOptions& opt = {}) {
    detail::check_point(ctx, point, true);
    ConvexSubproblem sp;
    sp.kind = SubproblemKind::P23;
    sp.Q = ctx.Q;
    sp.T = ctx.T;
    sp.n = 2 * ctx.Q + 2 * ctx.T;
    sp.linear = Eigen::VectorXd::Zero(sp.n);
    sp.gamma_scale = point.gamma;
    sp.beta_scale = point.beta;
    sp.expansion = Eigen::VectorXd::Ones(sp.n);
    detail::put_phases(sp.expansion, point.phi);

    const double P = ctx.tx_power;
    for (int t = 0; t < ctx.T; ++t) {
        const int gi = 2 * ctx.Q + 2 * t, bi = gi + 1;
        const double gs = point.gamma[t], bs = point.beta[t];
        sp.rates.push_back({gi, ctx.demand[t], gs});
        sp.quads.push_back(detail::interference_constraint(ctx, t, bs, bi, sp.n));

        const double w = detail::majorizer_omega(gs, bs, opt.weighting);
        const cplx g_hat = ctx.own_known[t];
        const cplx a_phi = ctx.Q > 0 ? (ctx.own_rows.row(t) * point.phi)(0) : cplx{};
        const cplx h = g_hat + a_phi;
        const double D = w * bs - gs / w;
        const double N = std::max({4.0 * gs * bs, 4.0 * P * std::norm(h), std::pow(w * bs + gs / w, 2),
                                   std::numeric_limits<double>::min()});
        QuadraticConstraint q;
        q.tag = ConstraintTag::MajorizedSinr;
        q.ue = t;
        q.offset = gi;
        q.rows.resize(1, 2);
        q.rows(0, 0) = (gs / w) / std::sqrt(N);
        q.rows(0, 1) = (w * bs) / std::sqrt(N);
        q.shift = Eigen::VectorXd::Zero(1);
        q.linear = Eigen::VectorXd::Zero(sp.n);
        q.linear[gi] = 2.0 * D * (gs / w) / N;
        q.linear[bi] = -2.0 * D * (w * bs) / N;
        if (ctx.Q > 0) detail::add_real_part(q.linear, ctx.own_rows.row(t), std::conj(h), -8.0 * P / N);
        q.constant = (D * D - 4.0 * P * (std::norm(g_hat) - std::norm(a_phi))) / N;
        q.scale = N;
        sp.quads.push_back(std::move(q));
        sp.quads.push_back(detail::aux_positive(gi, t, sp.n));
    }
    return sp;
}

/// P2.3 plus the linearized unit-modulus penalty -2C sum Re{phi~* phi}.
inline ConvexSubproblem assemble_p25(const CellContext& ctx, const ExpansionPoint& point, double C,
                                     const AssemblyOptions& opt = {}) {
    if (!(C >= 0.0)) throw std::invalid_argument("penalty weight must be >= 0");
    ConvexSubproblem sp = assemble_p23(ctx, point, opt);
    sp.kind = SubproblemKind::P25;
    sp.penalty = C;
    for (int m = 0; m < ctx.Q; ++m) {
        sp.linear[2 * m] -= 2.0 * C * point.phi[m].real();
        sp.linear[2 * m + 1] -= 2.0 * C * point.phi[m].imag();
    }
    return sp;
}

/// Frozen interference power per local UE for the decomposition scheme:
/// zero, or every interferer at full load with the context's phases.
inline Eigen::VectorXd decomposition_interference(const CellContext& ctx, InterferenceMode mode) {
    Eigen::VectorXd ups = Eigen::VectorXd::Zero(ctx.T);
    if (mode == InterferenceMode::Zero) return ups;
    for (int t = 0; t < ctx.T; ++t)
        for (int k = 0; k < ctx.K(); ++k) {
            cplx h = ctx.cross_known(t, k);
            if (ctx.Q > 0) h += (ctx.cross_rows[t].row(k) * ctx.frozen_phi)(0);
            ups[t] += ctx.powers[k] * std::norm(h);
        }
    return ups;
}

/// Problem in (phi, y) with interference frozen at `upsilon`: y is bounded by
/// the tangent of the useful power |g^ + a phi|^2 at the expansion phases.
inline ConvexSubproblem assemble_p31(const CellContext& ctx, const Eigen::VectorXcd& phi_tilde,
                                     const Eigen::VectorXd& upsilon) {
    if (phi_tilde.size() != ctx.Q) throw std::invalid_argument("expansion phases have wrong length");
    if (upsilon.size() != ctx.T) throw std::invalid_argument("upsilon has wrong length");
    ConvexSubproblem sp;
    sp.kind = SubproblemKind::P31;
    sp.Q = ctx.Q;
    sp.T = ctx.T;
    sp.n = 2 * ctx.Q + ctx.T;
    sp.linear = Eigen::VectorXd::Zero(sp.n);
    sp.upsilon = upsilon;
    sp.gamma_scale.resize(ctx.T);
    sp.expansion = Eigen::VectorXd::Ones(sp.n);
    detail::put_phases(sp.expansion, phi_tilde);
    for (int t = 0; t < ctx.T; ++t) {
        const int yi = 2 * ctx.Q + t;
        const cplx h = own_link(ctx, phi_tilde, t);
        const double ys = std::norm(h) > 0.0 ? std::norm(h) : 1.0;
        sp.gamma_scale[t] = ys;
        sp.rates.push_back({yi, ctx.demand[t], ys * ctx.tx_power / (upsilon[t] + ctx.noise)});
        QuadraticConstraint q;
        q.tag = ConstraintTag::PowerBound;
        q.ue = t;
        q.rows.resize(0, 0);
        q.linear = Eigen::VectorXd::Zero(sp.n);
        q.linear[yi] = 1.0;
        if (ctx.Q > 0) detail::add_real_part(q.linear, ctx.own_rows.row(t), std::conj(h), -2.0 / ys);
        q.constant = std::norm(h) / ys - 2.0 * (std::conj(h) * ctx.own_known[t]).real() / ys;
        q.scale = ys;
        sp.quads.push_back(std::move(q));
        sp.quads.push_back(detail::aux_positive(yi, t, sp.n));
    }
    return sp;
}

inline ConvexSubproblem assemble_p31(const CellContext& ctx, const Eigen::VectorXcd& phi_tilde,
                                     InterferenceMode mode) {
    return assemble_p31(ctx, phi_tilde, decomposition_interference(ctx, mode));
}

// ---------------------------------------------------------------------------
// KKT residual
// ---------------------------------------------------------------------------

/// Lawson-Hanson non-negative least squares: min ||A z - b|| s.t. z >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0) {
    const Eigen::Index m = A.cols();
    if (max_iter <= 0) max_iter = static_cast<int>(3 * m + 30);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    std::vector<bool> passive(m, false);
    const double tol = 1e-14 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max<Eigen::Index>(A.rows(), 1);

    auto solve_passive = [&](Eigen::VectorXd& s) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < m; ++j)
            if (passive[j]) idx.push_back(j);
        s = Eigen::VectorXd::Zero(m);
        if (idx.empty()) return;
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
        const Eigen::VectorXd sp = Ap.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[k];
    };

    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd w = A.transpose() * (b - A * z);
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < m; ++j)
            if (!passive[j] && w[j] > wmax) {
                wmax = w[j];
                best = j;
            }
        if (best < 0) break;
        passive[best] = true;
        Eigen::VectorXd s;
        for (int inner = 0; inner < max_iter; ++inner) {
            solve_passive(s);
            bool ok = true;
            for (Eigen::Index j = 0; j < m; ++j)
                if (passive[j] && s[j] <= 0.0) ok = false;
            if (ok) break;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < m; ++j)
                if (passive[j] && s[j] <= 0.0) alpha = std::min(alpha, z[j] / (z[j] - s[j]));
            z += alpha * (s - z);
            for (Eigen::Index j = 0; j < m; ++j)
                if (passive[j] && z[j] <= 1e-15) {
                    passive[j] = false;
                    z[j] = 0.0;
                }
        }
        z = s.cwiseMax(0.0);
    }
    return z;
}

namespace detail {

inline double kkt_from_multipliers(const ConvexSubproblem& sp, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lambda) {
    const Eigen::VectorXd f = sp.constraint_values(x);
    const Eigen::MatrixXd J = sp.constraint_jacobian(x);
    const Eigen::VectorXd stat = sp.objective_gradient(x) + J.transpose() * lambda;
    double r = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        r = std::max(r, lambda[i] * std::abs(f[i]));
        r = std::max(r, f[i]);
    }
    return r;
}

}  // namespace detail

/// Max of stationarity, complementary slackness and primal violation, with
/// multipliers fitted by non-negative least squares.
inline double kkt_residual(const ConvexSubproblem& sp, const Eigen::VectorXd& x) {
    const Eigen::VectorXd f = sp.constraint_values(x);
    const Eigen::MatrixXd J = sp.constraint_jacobian(x);
    const Eigen::Index m = f.size();
    Eigen::MatrixXd A(sp.n + m, m);
    A.topRows(sp.n) = J.transpose();
    A.bottomRows(m) = f.asDiagonal();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(sp.n + m);
    b.head(sp.n) = -sp.objective_gradient(x);
    return detail::kkt_from_multipliers(sp, x, nnls(A, b));
}

// ---------------------------------------------------------------------------
// Barrier solver
// ---------------------------------------------------------------------------

namespace detail {

/// Log-barrier for the subproblem. In phase-1 mode an extra variable s is
/// appended, the objective is s, every constraint becomes f_i(x) - s <= 0,
/// and s >= -1 keeps the problem bounded.
class Barrier {
public:
    Barrier(const ConvexSubproblem& sp, bool phase1) : sp_(sp), phase1_(phase1) {
        dim_ = sp.n + (phase1 ? 1 : 0);
    }
    int dim() const { return dim_; }

    double slack_of(const Eigen::VectorXd& z) const { return phase1_ ? z[sp_.n] : 0.0; }

    /// Barrier value, or +inf outside the domain.
    double value(const Eigen::VectorXd& z, double t) const {
        const Eigen::VectorXd x = z.head(sp_.n);
        const double s = slack_of(z);
        double acc = 0.0;
        if (phase1_) {
            acc = t * s;
            if (!(s > -1.0)) return inf();
            acc -= std::log(s + 1.0);
        } else {
            for (const RateTerm& r : sp_.rates)
                if (r.demand != 0.0 && !(r.gain * x[r.index] > 0.0)) return inf();
            acc = t * sp_.objective(x);
        }
        for (const QuadraticConstraint& q : sp_.quads) {
            const double f = q.value(x) - s;
            if (!(f < 0.0)) return inf();
            acc -= std::log(-f);
        }
        if (sp_.unit_disc)
            for (int m = 0; m < sp_.Q; ++m) {
                const double f = x[2 * m] * x[2 * m] + x[2 * m + 1] * x[2 * m + 1] - 1.0 - s;
                if (!(f < 0.0)) return inf();
                acc -= std::log(-f);
            }
        return std::isfinite(acc) ? acc : inf();
    }

    void derivatives(const Eigen::VectorXd& z, double t, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
        const int n = sp_.n;
        const Eigen::VectorXd x = z.head(n);
        const double s = slack_of(z);
        g = Eigen::VectorXd::Zero(dim_);
        H = Eigen::MatrixXd::Zero(dim_, dim_);
        if (phase1_) {
            g[n] = t - 1.0 / (s + 1.0);
            H(n, n) = 1.0 / ((s + 1.0) * (s + 1.0));
        } else {
            g.head(n) = t * sp_.linear;
            for (const RateTerm& r : sp_.rates) {
                if (r.demand == 0.0) continue;
                const double u = 1.0 + r.gain * x[r.index];
                const double L = std::log(u);
                const double c = r.demand * std::numbers::ln2;
                g[r.index] -= t * c * r.gain / (u * L * L);
                H(r.index, r.index) += t * c * r.gain * r.gain * (L + 2.0) / (u * u * L * L * L);
            }
        }
        const int nq = static_cast<int>(sp_.quads.size());
        Eigen::MatrixXd G(dim_, nq);
        for (int i = 0; i < nq; ++i) {
            const QuadraticConstraint& q = sp_.quads[i];
            const double f = q.value(x) - s;
            const double inv = 1.0 / (-f);
            Eigen::VectorXd gi = Eigen::VectorXd::Zero(dim_);
            gi.head(n) = q.linear;
            if (q.rows.rows() > 0) {
                const Eigen::VectorXd res = q.residual(x);
                gi.segment(q.offset, q.rows.cols()) += 2.0 * q.rows.transpose() * res;
                H.block(q.offset, q.offset, q.rows.cols(), q.rows.cols())
                    .selfadjointView<Eigen::Lower>()
                    .rankUpdate(q.rows.transpose(), 2.0 * inv);
            }
            if (phase1_) gi[n] = -1.0;
            g += inv * gi;
            G.col(i) = inv * gi;
        }
        if (nq > 0) H.selfadjointView<Eigen::Lower>().rankUpdate(G);
        if (sp_.unit_disc)
            for (int m = 0; m < sp_.Q; ++m) {
                const double a = x[2 * m], b = x[2 * m + 1];
                const double f = a * a + b * b - 1.0 - s;
                const double inv = 1.0 / (-f);
                Eigen::Vector3d gi(2.0 * a, 2.0 * b, -1.0);
                g[2 * m] += inv * gi[0];
                g[2 * m + 1] += inv * gi[1];
                const double i2 = inv * inv;
                H(2 * m, 2 * m) += i2 * gi[0] * gi[0] + 2.0 * inv;
                H(2 * m + 1, 2 * m + 1) += i2 * gi[1] * gi[1] + 2.0 * inv;
                H(2 * m + 1, 2 * m) += i2 * gi[0] * gi[1];
                if (phase1_) {
                    g[n] -= inv;
                    H(n, 2 * m) -= i2 * gi[0];
                    H(n, 2 * m + 1) -= i2 * gi[1];
                    H(n, n) += i2;
                }
            }
        H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    }

    static double inf() { return std::numeric_limits<double>::infinity(); }

private:
    const ConvexSubproblem& sp_;
    bool phase1_;
    int dim_;
};

/// Newton direction for H d = -g with diagonal equilibration and a
/// regularized fallback.
inline Eigen::VectorXd newton_direction(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
    const Eigen::VectorXd d = H.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd Hs = d.asDiagonal() * H * d.asDiagonal();
    const Eigen::VectorXd gs = d.cwiseProduct(g);
    Eigen::LLT<Eigen::MatrixXd> llt(Hs);
    if (llt.info() == Eigen::Success) return d.cwiseProduct(llt.solve(-gs));
    for (double reg = 1e-12; reg < 1.0; reg *= 100.0) {
        Hs.diagonal().array() += reg;
        llt.compute(Hs);
        if (llt.info() == Eigen::Success) return d.cwiseProduct(llt.solve(-gs));
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
    return d.cwiseProduct(ldlt.solve(-gs));
}

struct CenterResult {
    int steps = 0;
    bool stalled = false;
};

/// Damped Newton minimization of the barrier at fixed t.
inline CenterResult center(const Barrier& B, Eigen::VectorXd& z, double t, double dec_tol, int max_steps,
                           double stop_slack = -std::numeric_limits<double>::infinity()) {
    CenterResult res;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    double v = B.value(z, t);
    for (; res.steps < max_steps; ++res.steps) {
        if (B.slack_of(z) < stop_slack) break;
        B.derivatives(z, t, g, H);
        const Eigen::VectorXd dz = newton_direction(H, g);
        const double slope = g.dot(dz);
        if (!(slope < 0.0) || -slope / 2.0 <= std::max(dec_tol, 1e-14 * std::abs(v))) break;
        double alpha = 1.0;
        double vn = B.value(z + alpha * dz, t);
        while (!(vn <= v + 0.01 * alpha * slope) && alpha > 1e-20) {
            alpha *= 0.5;
            vn = B.value(z + alpha * dz, t);
        }
        if (alpha <= 1e-20 || !(vn < v)) {
            res.stalled = true;
            break;
        }
        z += alpha * dz;
        v = vn;
    }
    return res;
}

inline bool strictly_feasible(const ConvexSubproblem& sp, const Eigen::VectorXd& x) {
    return std::isfinite(Barrier(sp, false).value(x, 0.0));
}

/// Interior start near the expansion point: shrink phases, lift beta above the
/// interference bound, then back gamma (or y) off until the majorized bound
/// is slack.
inline Eigen::VectorXd interior_start(const ConvexSubproblem& sp) {
    Eigen::VectorXd x = sp.expansion;
    x.head(2 * sp.Q) *= (1.0 - 1e-6);
    if (strictly_feasible(sp, x) || sp.kind == SubproblemKind::Generic) return x;
    const int stride = sp.aux_stride();
    for (const QuadraticConstraint& q : sp.quads) {
        if (q.tag != ConstraintTag::Interference) continue;
        const int bi = 2 * sp.Q + stride * q.ue + 1;
        const double f = q.value(x);
        if (f > -1e-7) x[bi] += f + 1e-7 * std::max(1.0, x[bi]);
    }
    for (const QuadraticConstraint& q : sp.quads) {
        if (q.tag != ConstraintTag::MajorizedSinr && q.tag != ConstraintTag::PowerBound) continue;
        const int gi = 2 * sp.Q + stride * q.ue;
        const double base = x[gi];
        for (double cut = 1e-7; cut < 1.0 && !(q.value(x) < 0.0); cut *= 4.0) x[gi] = base * (1.0 - cut);
    }
    return x;
}

}  // namespace detail

/// Interior-point solve. Never returns a worse objective than the expansion
/// point when that point is feasible.
inline SubproblemSolution solve(const ConvexSubproblem& sp, const SolverOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
    SubproblemSolution out;
    Eigen::VectorXd x = detail::interior_start(sp);
    int budget = opt.max_newton;

    if (!detail::strictly_feasible(sp, x)) {
        // Phase 1: minimize the largest constraint value.
        out.used_phase1 = true;
        detail::Barrier B1(sp, true);
        Eigen::VectorXd z(B1.dim());
        z.head(sp.n) = x;
        const Eigen::VectorXd f = sp.constraint_values(x);
        z[sp.n] = (f.size() ? f.maxCoeff() : 0.0) + 1.0;
        double t = 1.0;
        for (int stage = 0; stage < 30 && budget > 0 && !(B1.slack_of(z) < -1e-9); ++stage, t *= 10.0) {
            const auto r = detail::center(B1, z, t, 1e-10, budget, -1e-9);
            budget -= r.steps;
        }
        x = z.head(sp.n);
        if (!detail::strictly_feasible(sp, x)) {
            out.status = SolveStatus::Infeasible;
            out.x = sp.expansion;
            out.phi = sp.phi_of(out.x);
            out.objective_value = std::numeric_limits<double>::infinity();
            return out;
        }
    }

    detail::Barrier B(sp, false);
    const double t_final = std::max(opt.t0, 10.0 / opt.tol);
    double t = opt.t0;
    bool capped = false;
    while (true) {
        const bool last = t >= t_final;
        const auto r = detail::center(B, x, t, last ? 1e-12 : 1e-8, budget);
        budget -= r.steps;
        out.newton_steps += r.steps;
        if (budget <= 0) {
            capped = true;
            break;
        }
        if (last) break;
        t = std::min(t * opt.growth, t_final);
    }

    // Barrier multipliers lambda_i = 1 / (-t f_i).
    const Eigen::VectorXd f = sp.constraint_values(x);
    const Eigen::VectorXd lambda = (-t * f).cwiseInverse();
    out.kkt_residual = detail::kkt_from_multipliers(sp, x, lambda);
    out.status = (capped && out.kkt_residual > opt.tol) ? SolveStatus::MaxIter : SolveStatus::Optimal;

    out.objective_value = sp.objective(x);
    const Eigen::VectorXd fe = sp.constraint_values(sp.expansion);
    const bool expansion_feasible = fe.size() == 0 || fe.maxCoeff() <= 1e-9;
    out.expansion_objective = expansion_feasible ? sp.objective(sp.expansion) : std::numeric_limits<double>::infinity();
    if (expansion_feasible && out.objective_value > out.expansion_objective) {
        x = sp.expansion;
        out.objective_value = out.expansion_objective;
        out.kept_expansion = true;
    }
    out.x = x;
    out.phi = sp.phi_of(x);
    out.gamma = sp.aux_of(x, 0);
    if (sp.kind != SubproblemKind::P31 && sp.beta_scale.size() == sp.T) out.beta = sp.aux_of(x, 1);
    const Eigen::VectorXd fx = sp.constraint_values(x);
    out.max_violation = fx.size() ? std::max(0.0, fx.maxCoeff()) : 0.0;
    if (opt.verify) {
        if (out.max_violation > 1e-8) throw SolverFailure("returned point violates a constraint");
        out.kkt_residual = std::min(out.kkt_residual, kkt_residual(sp, x));
    }
    return out;
}

/// Plain-text dump: header line, sizes, objective, then one block per constraint.
inline void write_subproblem(std::ostream& os, const ConvexSubproblem& sp) {
    os.precision(17);
    os << "risload-subproblem 1\n";
    os << "kind " << static_cast<int>(sp.kind) << " n " << sp.n << " Q " << sp.Q << " T " << sp.T
       << " unit_disc " << sp.unit_disc << " penalty " << sp.penalty << "\n";
    os << "rates " << sp.rates.size() << "\n";
    for (const RateTerm& r : sp.rates) os << r.index << ' ' << r.demand << ' ' << r.gain << "\n";
    os << "linear";
    for (double v : sp.linear) os << ' ' << v;
    os << "\nconstant " << sp.constant << "\n";
    os << "expansion";
    for (double v : sp.expansion) os << ' ' << v;
    os << "\nconstraints " << sp.quads.size() << "\n";
    for (const QuadraticConstraint& q : sp.quads) {
        os << to_string(q.tag) << " ue " << q.ue << " offset " << q.offset << " rows " << q.rows.rows() << " cols "
           << q.rows.cols() << " constant " << q.constant << " scale " << q.scale << "\n";
        for (Eigen::Index r = 0; r < q.rows.rows(); ++r) {
            for (Eigen::Index c = 0; c < q.rows.cols(); ++c) os << q.rows(r, c) << ' ';
            os << "| " << q.shift[r] << "\n";
        }
        os << "linear";
        for (Eigen::Index i = 0; i < q.linear.size(); ++i)
            if (q.linear[i] != 0.0) os << ' ' << i << ':' << q.linear[i];
        os << "\n";
    }
}

}  // namespace risload
