// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "risload/coupling.hpp"
#include "risload/cvxsub.hpp"
#include "risload/error.hpp"

namespace risload {

/// Single-cell optimizer state: phases plus the SINR/interference auxiliaries.
struct MmState {
    Eigen::VectorXcd phi;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
    std::vector<double> objective_trace;
    int iterations = 0;
    double penalty = 0.0;
    /// Trace indices where a new penalty stage begins (unit-modulus runs).
    std::vector<int> stage_starts;
};

struct SingleCellResult {
    double rho = 0.0;
    Eigen::VectorXcd phi;
    MmState state;
    bool converged = true;
};

struct MmOptions {
    double eps = 1e-4;
    bool relative = false;
    int max_iter = 200;
    /// Reset gamma to the exact SINR and beta to interference + noise after
    /// every convex step. The load never increases by doing so.
    bool tighten = true;
    MajorizerWeighting weighting = MajorizerWeighting::Balanced;
    double penalty_scale = 0.1;
    int max_escalations = 6;
    double modulus_tol = 1e-3;
    SolverOptions solver{};
};

/// (beta + gamma)^2 - (beta - gamma)^2 - 4 P |g^ + a phi|^2 for local UE t.
inline double exact_F(const CellContext& ctx, int t, double gamma, double beta, const Eigen::VectorXcd& phi) {
    const double s = beta + gamma, d = beta - gamma;
    return s * s - d * d - 4.0 * ctx.tx_power * std::norm(own_link(ctx, phi, t));
}

/// Convex upper bound of exact_F built at `point`, with the (beta, gamma)
/// split weighted by `omega` (omega = 1 is the unweighted form).
inline double majorized_F(const CellContext& ctx, int t, double gamma, double beta, const Eigen::VectorXcd& phi,
                          const ExpansionPoint& point, double omega = 1.0) {
    const double gt = point.gamma[t], bt = point.beta[t];
    const double D = omega * bt - gt / omega;
    const double u = omega * beta - gamma / omega;
    const double s = omega * beta + gamma / omega;
    const cplx g_hat = ctx.own_known[t];
    const cplx a_tilde = ctx.Q > 0 ? (ctx.own_rows.row(t) * point.phi)(0) : cplx{};
    const cplx a_phi = ctx.Q > 0 ? (ctx.own_rows.row(t) * phi)(0) : cplx{};
    const double lin = 2.0 * (std::conj(g_hat + a_tilde) * a_phi).real() - std::norm(a_tilde) + std::norm(g_hat);
    return s * s - 2.0 * D * u + D * D - 4.0 * ctx.tx_power * lin;
}

/// gamma = exact SINR, beta = interference + noise at phases phi.
inline MmState tight_state(const CellContext& ctx, const Eigen::VectorXcd& phi) {
    MmState st;
    st.phi = phi;
    st.gamma.resize(ctx.T);
    st.beta.resize(ctx.T);
    for (int t = 0; t < ctx.T; ++t) {
        st.beta[t] = single_cell_interference(ctx, phi, t);
        const double g = ctx.tx_power * std::norm(own_link(ctx, phi, t)) / st.beta[t];
        if (!(g > 0.0) && ctx.demand[t] > 0.0)
            throw DemandUnservable("UE " + std::to_string(ctx.ues[t]) + " has zero useful gain", ctx.ues[t]);
        st.gamma[t] = g > 0.0 ? g : 1e-300;
    }
    return st;
}

inline double load_from_gamma(const CellContext& ctx, const Eigen::VectorXd& gamma) {
    double acc = 0.0;
    for (int t = 0; t < ctx.T; ++t)
        if (ctx.demand[t] != 0.0) acc += ctx.demand[t] / std::log2(1.0 + gamma[t]);
    return acc;
}

/// Load minus C * sum(|phi|^2 - 1): the penalized unit-modulus objective.
inline double penalized_objective(const CellContext& ctx, const MmState& st, double C) {
    return load_from_gamma(ctx, st.gamma) - C * (st.phi.cwiseAbs2().array() - 1.0).sum();
}

/// Element-wise nearest point on the N-point circle.
inline Eigen::VectorXcd round_to_discrete(const Eigen::VectorXcd& phi, int levels) {
    if (levels < 2) throw std::invalid_argument("rounding needs N >= 2");
    const Domain d = Domain::discrete(levels);
    Eigen::VectorXcd out(phi.size());
    for (Eigen::Index m = 0; m < phi.size(); ++m) out[m] = d.level(nearest_level(phi[m], levels));
    return out;
}

/// phi / |phi| element-wise; zeros map to 1.
inline Eigen::VectorXcd project_unit(const Eigen::VectorXcd& phi) {
    Eigen::VectorXcd out = phi;
    for (Eigen::Index m = 0; m < out.size(); ++m) {
        const double a = std::abs(out[m]);
        out[m] = a > 0.0 ? out[m] / a : cplx(1.0, 0.0);
    }
    return out;
}

namespace detail {

inline bool changed_less(double prev, double cur, const MmOptions& opt) {
    const double delta = std::abs(prev - cur);
    return opt.relative ? delta <= opt.eps * std::abs(prev) : delta <= opt.eps;
}

inline MmState start_state(const CellContext& ctx, const MmState& init, const MmOptions& opt) {
    if (init.phi.size() != ctx.Q) throw std::invalid_argument("initial phases have wrong length");
    if (opt.tighten || init.gamma.size() != ctx.T || init.beta.size() != ctx.T) return tight_state(ctx, init.phi);
    MmState st = init;
    st.objective_trace.clear();
    st.stage_starts.clear();
    st.iterations = 0;
    return st;
}

/// One convex step from `st`; returns the new state (tightened if requested).
inline MmState mm_step(const CellContext& ctx, const MmState& st, double C, const MmOptions& opt, int iteration) {
    const ExpansionPoint pt{st.phi, st.gamma, st.beta};
    const AssemblyOptions aopt{opt.weighting};
    const ConvexSubproblem sp = C > 0.0 ? assemble_p25(ctx, pt, C, aopt) : assemble_p23(ctx, pt, aopt);
    const SubproblemSolution sol = solve(sp, opt.solver);
    if (sol.status == SolveStatus::Infeasible)
        throw SolverFailure("convex step infeasible", iteration, ctx.cell);
    MmState next = opt.tighten ? tight_state(ctx, sol.phi) : MmState{sol.phi, sol.gamma, sol.beta, {}, 0, 0.0, {}};
    next.objective_trace = st.objective_trace;
    next.stage_starts = st.stage_starts;
    next.iterations = st.iterations;
    next.penalty = C;
    return next;
}

}  // namespace detail

/// Majorization-minimization over the disc (Ideal) or the unit circle
/// (UnitModulus, through an escalating linearized penalty).
inline SingleCellResult mm_single_cell(const CellContext& ctx, Domain domain, const MmState& init,
                                       const MmOptions& opt = {}) {
    if (!(opt.eps > 0.0)) throw std::invalid_argument("MM tolerance must be > 0");
    if (domain.kind == Domain::Kind::Discrete)
        throw std::invalid_argument("mm_single_cell handles the continuous domains only");
    MmState st = detail::start_state(ctx, init, opt);
    SingleCellResult res;

    if (ctx.Q == 0 || !(ctx.demand.array() > 0.0).any()) {
        st.iterations = 1;
        st.objective_trace = {load_from_gamma(ctx, st.gamma)};
        res.rho = single_cell_load(ctx, st.phi);
        res.phi = st.phi;
        res.state = st;
        return res;
    }

    if (domain.kind == Domain::Kind::Ideal) {
        double obj = load_from_gamma(ctx, st.gamma);
        st.objective_trace.push_back(obj);
        res.converged = false;
        while (st.iterations < opt.max_iter) {
            MmState next = detail::mm_step(ctx, st, 0.0, opt, st.iterations);
            next.iterations = st.iterations + 1;
            const double nobj = load_from_gamma(ctx, next.gamma);
            next.objective_trace.push_back(nobj);
            st = std::move(next);
            const bool done = detail::changed_less(obj, nobj, opt);
            obj = nobj;
            if (done) {
                res.converged = true;
                break;
            }
        }
        res.rho = opt.tighten ? single_cell_load(ctx, st.phi) : obj;
        res.phi = st.phi;
        res.state = std::move(st);
        return res;
    }

    // Unit modulus: penalty stages, each a monotone MM run on the penalized objective.
    const Eigen::VectorXcd init_proj = project_unit(st.phi);
    const double init_load = single_cell_load(ctx, init_proj);
    double C = opt.penalty_scale * load_from_gamma(ctx, st.gamma) / (2.0 * ctx.Q);
    if (!(C > 0.0)) C = opt.penalty_scale / (2.0 * ctx.Q);
    bool converged = true;
    for (int esc = 0;; ++esc) {
        st.stage_starts.push_back(static_cast<int>(st.objective_trace.size()));
        double obj = penalized_objective(ctx, st, C);
        st.objective_trace.push_back(obj);
        bool stage_done = false;
        while (st.iterations < opt.max_iter) {
            MmState next = detail::mm_step(ctx, st, C, opt, st.iterations);
            next.iterations = st.iterations + 1;
            const double nobj = penalized_objective(ctx, next, C);
            next.objective_trace.push_back(nobj);
            st = std::move(next);
            const bool done = detail::changed_less(obj, nobj, opt);
            obj = nobj;
            if (done) {
                stage_done = true;
                break;
            }
        }
        if (!stage_done) converged = false;
        const double dev = (st.phi.cwiseAbs().array() - 1.0).abs().maxCoeff();
        if (dev <= opt.modulus_tol || esc >= opt.max_escalations || st.iterations >= opt.max_iter) break;
        C *= 2.0;
    }
    st.penalty = C;

    Eigen::VectorXcd proj = project_unit(st.phi);
    double rho = single_cell_load(ctx, proj);
    if (rho > init_load) {
        // Projection lost more than the run gained; keep the start phases.
        proj = init_proj;
        rho = init_load;
    }
    MmState fin = tight_state(ctx, proj);
    fin.objective_trace = std::move(st.objective_trace);
    fin.stage_starts = std::move(st.stage_starts);
    fin.iterations = st.iterations;
    fin.penalty = C;
    res.rho = rho;
    res.phi = proj;
    res.state = std::move(fin);
    res.converged = converged;
    return res;
}

/// Unit-modulus run followed by element-wise rounding; the load is evaluated
/// at the rounded phases.
inline SingleCellResult mm_single_cell_d3(const CellContext& ctx, int levels, const MmState& init,
                                          const MmOptions& opt = {}) {
    SingleCellResult r = mm_single_cell(ctx, Domain::unit_modulus(), init, opt);
    if (ctx.Q == 0) return r;
    const Eigen::VectorXcd rounded = round_to_discrete(r.phi, levels);
    MmState st = tight_state(ctx, rounded);
    st.objective_trace = std::move(r.state.objective_trace);
    st.stage_starts = std::move(r.state.stage_starts);
    st.iterations = r.state.iterations;
    st.penalty = r.state.penalty;
    r.rho = single_cell_load(ctx, rounded);
    r.phi = rounded;
    r.state = std::move(st);
    return r;
}

}  // namespace risload
