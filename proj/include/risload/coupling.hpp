// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "risload/error.hpp"
#include "risload/scenario.hpp"

namespace risload {

using LoadVector = Eigen::VectorXd;

/// Reflection coefficients of every RIS element, flat over (ris, element).
struct PhaseConfig {
    Eigen::VectorXcd phi;
    Domain domain = Domain::ideal();

    static PhaseConfig uniform(const Scenario& s, cplx value, Domain d = Domain::ideal()) {
        return {Eigen::VectorXcd::Constant(s.num_phase_elements(), value), d};
    }
    /// Every element at e^{i pi}, snapped onto the discrete set when needed.
    static PhaseConfig initial(const Scenario& s, Domain d = Domain::ideal());

    /// True when every coefficient satisfies the domain constraint.
    bool valid(double tol = 1e-9) const {
        for (const cplx& v : phi) {
            const double a = std::abs(v);
            switch (domain.kind) {
                case Domain::Kind::Ideal:
                    if (a > 1.0 + tol) return false;
                    break;
                case Domain::Kind::UnitModulus:
                    if (std::abs(a - 1.0) > tol) return false;
                    break;
                case Domain::Kind::Discrete: {
                    bool hit = false;
                    for (int k = 0; k < domain.levels && !hit; ++k) hit = (v == domain.level(k));
                    if (!hit) return false;
                    break;
                }
            }
        }
        return true;
    }
};

/// Nearest point of the N-point circle; ties (within 1e-12) go to the smaller index.
inline int nearest_level(cplx v, int levels) {
    const double step = 2.0 * std::numbers::pi / levels;
    double ang = std::arg(v);
    if (ang < 0) ang += 2.0 * std::numbers::pi;
    const int lo = static_cast<int>(std::floor(ang / step)) % levels;
    const int hi = (lo + 1) % levels;
    const double dlo = std::abs(v - std::polar(1.0, lo * step));
    const double dhi = std::abs(v - std::polar(1.0, hi * step));
    if (std::abs(dlo - dhi) <= 1e-12) return std::min(lo, hi);
    return dlo < dhi ? lo : hi;
}

inline PhaseConfig PhaseConfig::initial(const Scenario& s, Domain d) {
    const cplx pi_phase = std::polar(1.0, std::numbers::pi);
    if (d.kind == Domain::Kind::Discrete) return uniform(s, d.level(nearest_level(pi_phase, d.levels)), d);
    return uniform(s, pi_phase, d);
}

struct CouplingReport {
    LoadVector loads;
    Eigen::VectorXd per_ue_sinr;
    Eigen::VectorXd per_ue_load_share;
    int iterations = 0;
    double residual = 0.0;
    bool feasible = true;
};

struct FixedPointOptions {
    double tol = 1e-6;
    int max_iter = 10000;
    std::optional<LoadVector> warm_start;
    /// When set, receives every iterate starting with the initial vector.
    std::vector<LoadVector>* history = nullptr;
};

/// Aggregate channel from the BS of `cell` to `ue`: g + sum_l Lambda_l Phi_l.
inline cplx link_gain(const Scenario& s, const PhaseConfig& p, int cell, int ue) {
    cplx h = s.direct_gain(cell, ue);
    if (s.num_phase_elements() > 0) h += (s.cascade_all(cell, ue) * p.phi)(0);
    return h;
}

/// W(k, j) = P_k |h_kj|^2 for every cell/UE pair.
inline Eigen::MatrixXd link_power_matrix(const Scenario& s, const PhaseConfig& p) {
    if (p.phi.size() != s.num_phase_elements())
        throw std::invalid_argument("phase config does not match scenario");
    Eigen::MatrixXd W(s.num_cells(), s.num_ues());
    for (int k = 0; k < s.num_cells(); ++k)
        for (int j = 0; j < s.num_ues(); ++j) W(k, j) = s.tx_power(k) * std::norm(link_gain(s, p, k, j));
    return W;
}

namespace detail {

inline double interference(const Scenario& s, const Eigen::MatrixXd& W, const LoadVector& loads, int ue) {
    const int own = s.serving_cell(ue);
    double acc = 0.0;
    for (int k = 0; k < s.num_cells(); ++k)
        if (k != own) acc += W(k, ue) * loads[k];
    return acc + s.noise_power();
}

inline double load_share(double demand, double sinr, int ue) {
    if (demand == 0.0) return 0.0;
    if (!(sinr > 0.0)) throw DemandUnservable("UE " + std::to_string(ue) + " has zero useful gain", ue);
    return demand / std::log2(1.0 + sinr);
}

inline double cell_load_from_powers(const Scenario& s, const Eigen::MatrixXd& W, const LoadVector& loads,
                                    int cell) {
    double acc = 0.0;
    for (int j : s.ues_of(cell))
        acc += load_share(s.demand(j), W(cell, j) / interference(s, W, loads, j), j);
    return acc;
}

}  // namespace detail

inline double sinr(const Scenario& s, const PhaseConfig& p, const LoadVector& loads, int ue) {
    const Eigen::MatrixXd W = link_power_matrix(s, p);
    return W(s.serving_cell(ue), ue) / detail::interference(s, W, loads, ue);
}

/// Load cell `cell` needs given the other cells' loads; loads[cell] is ignored.
inline double cell_load(const Scenario& s, const PhaseConfig& p, const LoadVector& loads, int cell) {
    return detail::cell_load_from_powers(s, link_power_matrix(s, p), loads, cell);
}

/// Solves rho = G(rho) from a precomputed link-power matrix.
inline CouplingReport fixed_point_from_powers(const Scenario& s, const Eigen::MatrixXd& W,
                                              const FixedPointOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("fixed point tolerance must be > 0");
    const int I = s.num_cells();
    auto G = [&](const LoadVector& rho) {
        LoadVector out(I);
        for (int i = 0; i < I; ++i) out[i] = detail::cell_load_from_powers(s, W, rho, i);
        return out;
    };
    LoadVector rho = opt.warm_start ? *opt.warm_start : LoadVector::Zero(I);
    if (rho.size() != I) throw std::invalid_argument("warm start has wrong length");
    if (opt.history) opt.history->push_back(rho);
    LoadVector next = G(rho);
    int iters = 0;
    double res = 0.0;
    while (true) {
        rho = next;
        ++iters;
        if (opt.history) opt.history->push_back(rho);
        next = G(rho);
        res = (next - rho).cwiseAbs().maxCoeff();
        if (res <= opt.tol) break;
        if (iters >= opt.max_iter || !std::isfinite(res) || rho.maxCoeff() > 1e12)
            throw NonConvergence("load fixed point did not converge", res, iters);
    }
    CouplingReport rep;
    rep.loads = rho;
    rep.iterations = iters;
    rep.residual = res;
    rep.feasible = (rho.array() <= 1.0).all();
    rep.per_ue_sinr.resize(s.num_ues());
    rep.per_ue_load_share.resize(s.num_ues());
    for (int j = 0; j < s.num_ues(); ++j) {
        rep.per_ue_sinr[j] = W(s.serving_cell(j), j) / detail::interference(s, W, rho, j);
        rep.per_ue_load_share[j] = detail::load_share(s.demand(j), rep.per_ue_sinr[j], j);
    }
    return rep;
}

inline CouplingReport fixed_point_loads(const Scenario& s, const PhaseConfig& p,
                                        const FixedPointOptions& opt = {}) {
    return fixed_point_from_powers(s, link_power_matrix(s, p), opt);
}

// ---------------------------------------------------------------------------
// Frozen single-cell view
// ---------------------------------------------------------------------------

/// Cell `cell` seen with every other cell's phases and loads frozen. Local
/// phases phi (length Q) enter each link as known + row * phi.
struct CellContext {
    int cell = 0;
    int T = 0;  // UEs of the cell
    int Q = 0;  // local RIS elements
    std::vector<int> ues;
    std::vector<int> ris;
    double tx_power = 1.0;
    double noise = 1.0;
    Eigen::VectorXd demand;          // T
    Eigen::VectorXcd own_known;      // T, g-hat
    Eigen::MatrixXcd own_rows;       // T x Q
    std::vector<int> interferers;    // K cell ids
    Eigen::VectorXd weights;         // K, P_k rho_k
    Eigen::VectorXd powers;          // K, P_k
    Eigen::MatrixXcd cross_known;    // T x K
    std::vector<Eigen::MatrixXcd> cross_rows;  // T entries of K x Q
    Eigen::VectorXcd frozen_phi;     // local phases at construction

    int K() const { return static_cast<int>(interferers.size()); }
};

/// Gathers the local phases of `cell` from a full config.
inline Eigen::VectorXcd cell_phases(const Scenario& s, const PhaseConfig& p, int cell) {
    const int M = s.elements();
    const auto ris = s.ris_of(cell);
    Eigen::VectorXcd out(static_cast<Eigen::Index>(ris.size()) * M);
    for (std::size_t r = 0; r < ris.size(); ++r) out.segment(r * M, M) = p.phi.segment(ris[r] * M, M);
    return out;
}

inline void set_cell_phases(const Scenario& s, PhaseConfig& p, int cell, const Eigen::VectorXcd& local) {
    const int M = s.elements();
    const auto ris = s.ris_of(cell);
    if (local.size() != static_cast<Eigen::Index>(ris.size()) * M)
        throw std::invalid_argument("local phase vector has wrong length");
    for (std::size_t r = 0; r < ris.size(); ++r) p.phi.segment(ris[r] * M, M) = local.segment(r * M, M);
}

inline CellContext make_cell_context(const Scenario& s, const PhaseConfig& p, const LoadVector& loads, int cell) {
    CellContext c;
    c.cell = cell;
    const auto ues = s.ues_of(cell);
    const auto ris = s.ris_of(cell);
    c.ues.assign(ues.begin(), ues.end());
    c.ris.assign(ris.begin(), ris.end());
    const int M = s.elements();
    c.T = static_cast<int>(c.ues.size());
    c.Q = static_cast<int>(c.ris.size()) * M;
    c.tx_power = s.tx_power(cell);
    c.noise = s.noise_power();
    c.frozen_phi = cell_phases(s, p, cell);
    for (int k = 0; k < s.num_cells(); ++k)
        if (k != cell) c.interferers.push_back(k);
    const int K = c.K();
    c.weights.resize(K);
    c.powers.resize(K);
    for (int q = 0; q < K; ++q) {
        c.powers[q] = s.tx_power(c.interferers[q]);
        c.weights[q] = c.powers[q] * loads[c.interferers[q]];
    }

    // Split a full link into the part driven by local phases and the rest.
    auto split = [&](int k, int j, cplx& known, auto&& row) {
        known = link_gain(s, p, k, j);
        for (std::size_t r = 0; r < c.ris.size(); ++r) {
            const auto lam = s.cascade(k, j, c.ris[r]);
            row.segment(r * M, M) = lam;
            known -= (lam * c.frozen_phi.segment(r * M, M))(0);
        }
    };

    c.demand.resize(c.T);
    c.own_known.resize(c.T);
    c.own_rows.resize(c.T, c.Q);
    c.cross_known.resize(c.T, K);
    c.cross_rows.assign(c.T, Eigen::MatrixXcd(K, c.Q));
    for (int t = 0; t < c.T; ++t) {
        const int j = c.ues[t];
        c.demand[t] = s.demand(j);
        split(cell, j, c.own_known[t], c.own_rows.row(t));
        for (int q = 0; q < K; ++q) split(c.interferers[q], j, c.cross_known(t, q), c.cross_rows[t].row(q));
    }
    return c;
}

/// Useful link of local UE t under local phases phi.
inline cplx own_link(const CellContext& c, const Eigen::VectorXcd& phi, int t) {
    cplx h = c.own_known[t];
    if (c.Q > 0) h += (c.own_rows.row(t) * phi)(0);
    return h;
}

/// Interference plus noise at local UE t.
inline double single_cell_interference(const CellContext& c, const Eigen::VectorXcd& phi, int t) {
    double acc = c.noise;
    for (int q = 0; q < c.K(); ++q) {
        if (c.weights[q] == 0.0) continue;
        cplx h = c.cross_known(t, q);
        if (c.Q > 0) h += (c.cross_rows[t].row(q) * phi)(0);
        acc += c.weights[q] * std::norm(h);
    }
    return acc;
}

inline double single_cell_sinr(const CellContext& c, const Eigen::VectorXcd& phi, int t) {
    return c.tx_power * std::norm(own_link(c, phi, t)) / single_cell_interference(c, phi, t);
}

/// Frozen-interference load of the cell at local phases phi.
inline double single_cell_load(const CellContext& c, const Eigen::VectorXcd& phi) {
    double acc = 0.0;
    for (int t = 0; t < c.T; ++t) acc += detail::load_share(c.demand[t], single_cell_sinr(c, phi, t), c.ues[t]);
    return acc;
}

}  // namespace risload
