// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "risload/coupling.hpp"
#include "risload/cvxsub.hpp"
#include "risload/error.hpp"
#include "risload/ica.hpp"
#include "risload/mm.hpp"

namespace risload {

/// Every element switched off (zero amplitude).
inline Solution no_ris(const Scenario& s, const FixedPointOptions& fp = {}) {
    return evaluate_phases(s, PhaseConfig::uniform(s, cplx{}), "No-RIS", fp);
}

/// Amplitude ~ U[0, 1], phase ~ U[0, 2 pi), independent per element.
inline PhaseConfig random_phase_config(const Scenario& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PhaseConfig p = PhaseConfig::uniform(s, cplx{});
    for (auto& v : p.phi) {
        const double a = unit(rng);
        const double th = 2.0 * std::numbers::pi * unit(rng);
        v = std::polar(a, th);
    }
    return p;
}

inline Solution random_phases(const Scenario& s, std::uint64_t seed, const FixedPointOptions& fp = {}) {
    return evaluate_phases(s, random_phase_config(s, seed), "Random-D1", fp);
}

struct DecompositionOptions {
    double eps = 1e-4;
    int max_iter = 200;
    SolverOptions solver{};
    FixedPointOptions fixed_point{};
};

/// Sum of d / log2(1 + |h|^2 P / (upsilon + noise)) over the cell's UEs.
inline double decomposition_objective(const CellContext& ctx, const Eigen::VectorXcd& phi,
                                      const Eigen::VectorXd& upsilon) {
    double acc = 0.0;
    for (int t = 0; t < ctx.T; ++t) {
        const double snr = ctx.tx_power * std::norm(own_link(ctx, phi, t)) / (upsilon[t] + ctx.noise);
        acc += detail::load_share(ctx.demand[t], snr, ctx.ues[t]);
    }
    return acc;
}

/// Per-cell optimization under an assumed, fixed interference level; the
/// resulting phases are then evaluated under the true coupling.
inline Solution decomposition(const Scenario& s, InterferenceMode mode, const DecompositionOptions& opt = {}) {
    const PhaseConfig init = PhaseConfig::initial(s);
    PhaseConfig phases = init;
    const LoadVector full = LoadVector::Ones(s.num_cells());
    int max_iters = 0;
    for (int i = 0; i < s.num_cells(); ++i) {
        const CellContext ctx = make_cell_context(s, init, full, i);
        if (ctx.Q == 0) continue;
        const Eigen::VectorXd ups = decomposition_interference(ctx, mode);
        Eigen::VectorXcd phi = ctx.frozen_phi;
        double obj = decomposition_objective(ctx, phi, ups);
        int it = 0;
        for (; it < opt.max_iter; ++it) {
            const ConvexSubproblem sp = assemble_p31(ctx, phi, ups);
            const SubproblemSolution sol = solve(sp, opt.solver);
            if (sol.status == SolveStatus::Infeasible) throw SolverFailure("decomposition step infeasible", it, i);
            const double nobj = decomposition_objective(ctx, sol.phi, ups);
            const bool done = std::abs(obj - nobj) <= opt.eps;
            if (nobj <= obj) {
                phi = sol.phi;
                obj = nobj;
            }
            if (done) break;
        }
        max_iters = std::max(max_iters, it + 1);
        set_cell_phases(s, phases, i, phi);
    }
    Solution sol = evaluate_phases(s, phases, mode == InterferenceMode::Zero ? "Decomposition-1" : "Decomposition-2",
                                   opt.fixed_point);
    sol.sweeps = max_iters;
    return sol;
}

struct ExhaustiveResult {
    double load = std::numeric_limits<double>::infinity();
    std::vector<int> indices;
    Eigen::VectorXcd phi;
    std::uint64_t candidates = 0;
};

/// Exact minimizer of the frozen-interference cell load over the N-point
/// circle. Candidates are enumerated as a mixed-radix counter with the first
/// element fastest; ties go to the lexicographically smallest index tuple.
inline ExhaustiveResult exhaustive_single_cell(const CellContext& ctx, int levels,
                                               std::uint64_t budget = std::uint64_t{1} << 20) {
    const Domain d = Domain::discrete(levels);
    double total = 1.0;
    for (int m = 0; m < ctx.Q; ++m) total *= levels;
    if (total > static_cast<double>(budget))
        throw BudgetExceeded("exhaustive search needs " + std::to_string(total) + " candidates");

    std::vector<cplx> table(levels);
    for (int k = 0; k < levels; ++k) table[k] = d.level(k);
    std::vector<int> idx(ctx.Q, 0);
    Eigen::VectorXcd phi = Eigen::VectorXcd::Constant(ctx.Q, table[0]);

    ExhaustiveResult best;
    const auto n = static_cast<std::uint64_t>(total);
    for (std::uint64_t c = 0; c < n; ++c) {
        if (c > 0) {
            for (int m = 0; m < ctx.Q; ++m) {
                if (++idx[m] < levels) {
                    phi[m] = table[idx[m]];
                    break;
                }
                idx[m] = 0;
                phi[m] = table[0];
            }
        }
        double v;
        try {
            v = single_cell_load(ctx, phi);
        } catch (const DemandUnservable&) {
            continue;
        }
        ++best.candidates;
        const double tol = 1e-12 * std::max(1.0, std::abs(best.load));
        if (best.indices.empty() || v < best.load - tol || (std::abs(v - best.load) <= tol && idx < best.indices)) {
            best.load = v;
            best.indices = idx;
            best.phi = phi;
        }
    }
    if (best.indices.empty()) throw DemandUnservable("no discrete configuration serves every UE", ctx.ues.front());
    return best;
}

inline SingleCellSolver exhaustive_solver(int levels, std::uint64_t budget = std::uint64_t{1} << 20) {
    return [levels, budget](const CellContext& ctx, const MmState&) {
        const ExhaustiveResult e = exhaustive_single_cell(ctx, levels, budget);
        SingleCellResult r;
        r.rho = e.load;
        r.phi = e.phi;
        r.state = tight_state(ctx, e.phi);
        r.state.objective_trace = {e.load};
        r.state.iterations = 1;
        return r;
    };
}

/// ICA with exact per-cell minimization over the discrete set.
inline Solution global_opt_discrete(const Scenario& s, int levels, const IcaOptions& opt = {},
                                    std::uint64_t budget = std::uint64_t{1} << 20) {
    const Domain d = Domain::discrete(levels);
    return ica(s, PhaseConfig::initial(s, d), exhaustive_solver(levels, budget), "Global-" + d.label(), opt);
}

}  // namespace risload
