// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "risload/coupling.hpp"
#include "risload/error.hpp"
#include "risload/mm.hpp"

namespace risload {

/// Minimizes one cell's load in a frozen context, warm-started from `warm`.
using SingleCellSolver = std::function<SingleCellResult(const CellContext&, const MmState& warm)>;

/// Result of any scheme. `loads` are always the coupled fixed point at `phases`.
struct Solution {
    std::string scheme;
    LoadVector loads;
    PhaseConfig phases;
    double total_load = 0.0;
    bool feasible = true;
    bool converged = true;
    int sweeps = 0;
    std::vector<double> residual_trace;
    /// Load vector before the first sweep and after every sweep (ICA only).
    std::vector<LoadVector> load_history;
};

/// Called after every single-cell update during a sweep.
struct SweepEvent {
    int sweep = 0;
    int cell = 0;
    LoadVector loads_seen;  // loads frozen in the cell's context
    double new_load = 0.0;
};

struct IcaOptions {
    double eps = 1e-4;
    int max_sweeps = 100;
    /// Update all cells from the previous sweep's state instead of in place.
    bool jacobi = false;
    FixedPointOptions fixed_point{};
    std::function<void(const SweepEvent&)> observer;
};

struct IcaState {
    LoadVector loads;
    PhaseConfig phases;
    std::vector<MmState> per_cell;
    int sweep = 0;
    std::vector<double> residual_trace;
    std::vector<LoadVector> load_history;
};

inline Solution evaluate_phases(const Scenario& s, const PhaseConfig& p, std::string scheme,
                                const FixedPointOptions& fp = {}) {
    Solution sol;
    sol.scheme = std::move(scheme);
    sol.phases = p;
    const CouplingReport rep = fixed_point_loads(s, p, fp);
    sol.loads = rep.loads;
    sol.total_load = rep.loads.sum();
    sol.feasible = rep.feasible;
    return sol;
}

/// Coupled loads at phi0 and tight single-cell states for every cell. When
/// phi0 admits no finite load fixed point, every cell starts at full load.
inline IcaState initialize(const Scenario& s, const PhaseConfig& phi0, const FixedPointOptions& fp = {}) {
    IcaState st;
    st.phases = phi0;
    try {
        st.loads = fixed_point_loads(s, phi0, fp).loads;
    } catch (const NonConvergence&) {
        st.loads = LoadVector::Ones(s.num_cells());
    }
    st.load_history.push_back(st.loads);
    for (int i = 0; i < s.num_cells(); ++i) {
        const CellContext ctx = make_cell_context(s, phi0, st.loads, i);
        st.per_cell.push_back(tight_state(ctx, ctx.frozen_phi));
    }
    return st;
}

/// One pass over the cells in ascending order. In Gauss-Seidel mode (the
/// default) each cell sees the loads and phases already updated in this pass.
inline void sweep_once(IcaState& st, const Scenario& s, const SingleCellSolver& solver, const IcaOptions& opt = {}) {
    const LoadVector prev = st.loads;
    const PhaseConfig prev_phases = st.phases;
    ++st.sweep;
    for (int i = 0; i < s.num_cells(); ++i) {
        const LoadVector& seen = opt.jacobi ? prev : st.loads;
        const PhaseConfig& seen_phases = opt.jacobi ? prev_phases : st.phases;
        const CellContext ctx = make_cell_context(s, seen_phases, seen, i);
        SingleCellResult r;
        try {
            r = solver(ctx, st.per_cell[i]);
        } catch (const SolverFailure& e) {
            throw SolverFailure(e.what(), e.iteration(), i);
        }
        st.loads[i] = r.rho;
        set_cell_phases(s, st.phases, i, r.phi);
        st.per_cell[i] = std::move(r.state);
        if (opt.observer) opt.observer({st.sweep, i, seen, r.rho});
    }
    st.residual_trace.push_back((st.loads - prev).cwiseAbs().maxCoeff());
    st.load_history.push_back(st.loads);
}

/// Sweeps until the max-norm change of the load vector is at most eps.
inline Solution ica(const Scenario& s, const PhaseConfig& phi0, const SingleCellSolver& solver, std::string scheme,
                    const IcaOptions& opt = {}) {
    if (!(opt.eps > 0.0)) throw std::invalid_argument("ICA tolerance must be > 0");
    IcaState st = initialize(s, phi0, opt.fixed_point);
    bool converged = false;
    PhaseConfig best = st.phases;
    double best_total = st.loads.sum();
    while (st.sweep < opt.max_sweeps) {
        sweep_once(st, s, solver, opt);
        if (st.loads.sum() <= best_total) {
            best_total = st.loads.sum();
            best = st.phases;
        }
        if (st.residual_trace.back() <= opt.eps) {
            converged = true;
            break;
        }
    }
    // At the sweep cap, report the sweep with the lowest total load.
    Solution sol = evaluate_phases(s, converged ? st.phases : best, std::move(scheme), opt.fixed_point);
    sol.converged = converged;
    sol.sweeps = st.sweep;
    sol.residual_trace = std::move(st.residual_trace);
    sol.load_history = std::move(st.load_history);
    return sol;
}

/// Majorization-minimization inner solver for the continuous domains.
inline SingleCellSolver mm_solver(Domain domain, MmOptions opt = {}) {
    return [domain, opt](const CellContext& ctx, const MmState& warm) {
        return mm_single_cell(ctx, domain, warm, opt);
    };
}

/// Unit-modulus run plus rounding; keeps the incumbent discrete phases when
/// rounding lands on a worse point.
inline SingleCellSolver discrete_solver(int levels, MmOptions opt = {}) {
    return [levels, opt](const CellContext& ctx, const MmState& warm) {
        SingleCellResult r = mm_single_cell_d3(ctx, levels, warm, opt);
        if (ctx.Q == 0) return r;
        const double incumbent = single_cell_load(ctx, warm.phi);
        if (incumbent <= r.rho) {
            MmState st = tight_state(ctx, warm.phi);
            st.objective_trace = std::move(r.state.objective_trace);
            st.stage_starts = std::move(r.state.stage_starts);
            st.iterations = r.state.iterations;
            st.penalty = r.state.penalty;
            r.rho = incumbent;
            r.phi = warm.phi;
            r.state = std::move(st);
        }
        return r;
    };
}

inline std::string ica_label(Domain d) { return "ICA-" + d.label(); }

/// ICA from the all-e^{i pi} start with the matching inner solver.
inline Solution ica(const Scenario& s, Domain domain, const IcaOptions& opt = {}, const MmOptions& mm = {}) {
    const PhaseConfig phi0 = PhaseConfig::initial(s, domain);
    const SingleCellSolver solver =
        domain.kind == Domain::Kind::Discrete ? discrete_solver(domain.levels, mm) : mm_solver(domain, mm);
    return ica(s, phi0, solver, ica_label(domain), opt);
}

}  // namespace risload
