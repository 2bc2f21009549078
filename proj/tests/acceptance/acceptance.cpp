// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run. Prints one PASS/FAIL line per criterion with the measured
// quantities and exits non-zero if any criterion fails.
//
//   acceptance            all criteria
//   acceptance 3 7        only criteria 3 and 7 (10 also runs 6-9 to collect ICA runs)
//
// Network-level criteria (6-10) run the default seven-cell layout with 4
// elements per surface (28 per cell) instead of 20 to bound the run time.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"

using namespace risload;
using namespace risload::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Majorizer bounds the exact constraint and touches it at the expansion point.
// ---------------------------------------------------------------------------

Verdict majorizer() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0), logU(-3.0, 3.0), A(0.1, 5.0);
    auto disc = [&](int Q) {
        Eigen::VectorXcd v(Q);
        for (int m = 0; m < Q; ++m) {
            cplx c;
            do c = cplx(U(rng), U(rng));
            while (std::abs(c) > 1.0);
            v[m] = c;
        }
        return v;
    };
    double worst_unit = 0.0, worst_touch = 0.0, worst_phys = 0.0;
    long samples = 0;
    const int kSamples = 1000;

    // Unit-scale contexts: absolute tolerance.
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Scenario s = unit_scenario(seed, 3, 3, 1, 8, 0.5);
        const CellContext ctx =
            make_cell_context(s, random_phase_config(s, seed), LoadVector::Constant(3, 0.5), static_cast<int>(seed % 3));
        ExpansionPoint pt;
        pt.phi = disc(ctx.Q);
        pt.gamma = Eigen::VectorXd::NullaryExpr(ctx.T, [&] { return A(rng); });
        pt.beta = Eigen::VectorXd::NullaryExpr(ctx.T, [&] { return A(rng); });
        for (int t = 0; t < ctx.T; ++t)
            for (double w : {1.0, std::sqrt(pt.gamma[t] / pt.beta[t])}) {
                worst_touch = std::max(worst_touch, std::abs(majorized_F(ctx, t, pt.gamma[t], pt.beta[t], pt.phi, pt, w) -
                                                             exact_F(ctx, t, pt.gamma[t], pt.beta[t], pt.phi)));
                for (int k = 0; k < kSamples; ++k) {
                    const Eigen::VectorXcd phi = disc(ctx.Q);
                    const double g = pt.gamma[t] * std::exp(logU(rng)), b = pt.beta[t] * std::exp(logU(rng));
                    worst_unit = std::max(worst_unit, exact_F(ctx, t, g, b, phi) - majorized_F(ctx, t, g, b, phi, pt, w));
                    ++samples;
                }
            }
    }

    // Physical-scale contexts at the tight point: gap relative to the term scale.
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Scenario s = small_physical(seed, 3, 3, 1, 8, 0.02);
        const CellContext ctx = make_cell_context(s, random_phase_config(s, seed), LoadVector::Constant(3, 0.5),
                                                  static_cast<int>(seed % 3));
        const MmState st = tight_state(ctx, disc(ctx.Q));
        const ExpansionPoint pt{st.phi, st.gamma, st.beta};
        for (int t = 0; t < ctx.T; ++t)
            for (double w : {1.0, std::sqrt(pt.gamma[t] / pt.beta[t])}) {
                for (int k = 0; k < kSamples / 4; ++k) {
                    const Eigen::VectorXcd phi = disc(ctx.Q);
                    const double g = pt.gamma[t] * std::exp(logU(rng)), b = pt.beta[t] * std::exp(logU(rng));
                    const double ex = exact_F(ctx, t, g, b, phi), mj = majorized_F(ctx, t, g, b, phi, pt, w);
                    const double scale = std::max({std::abs(ex), std::abs(mj), (g + b) * (g + b), 4.0 * g * b,
                                                   std::pow(w * b + g / w, 2)});
                    worst_phys = std::max(worst_phys, (ex - mj) / scale);
                    ++samples;
                }
            }
    }
    const double secs = seconds_since(t0);
    const bool ok = worst_unit <= 1e-9 && worst_touch <= 1e-9 && worst_phys <= 1e-9 && secs < 60.0;
    return {ok, fmt("%ld samples, max(F - F~) unit %.2e, physical (relative) %.2e, expansion gap %.2e, %.1fs",
                    samples, worst_unit, worst_phys, worst_touch, secs)};
}

// ---------------------------------------------------------------------------
// 2. MM objective traces are non-increasing; eps = 1e-4 within 50 iterations.
// ---------------------------------------------------------------------------

Verdict mm_monotone() {
    const auto t0 = Clock::now();
    int runs = 0, rises = 0, over = 0, unconverged = 0, max_it = 0;
    double worst_rise = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Scenario s = small_physical(seed, 1, 5, 1, 20, 0.4 * 0.05);
        const CellContext ctx = context_at_init(s, 0, 0.0);
        const MmState init = tight_state(ctx, ctx.frozen_phi);
        for (auto [d, relative] : {std::pair{Domain::ideal(), false}, std::pair{Domain::ideal(), true},
                                   std::pair{Domain::unit_modulus(), false}}) {
            MmOptions opt;
            opt.relative = relative;
            const SingleCellResult r = mm_single_cell(ctx, d, init, opt);
            ++runs;
            const auto& tr = r.state.objective_trace;
            std::vector<int> starts = r.state.stage_starts;
            if (starts.empty()) starts.push_back(0);
            starts.push_back(static_cast<int>(tr.size()));
            // Within a penalty stage the objective is fixed; a new stage
            // doubles the penalty weight and restarts the comparison.
            for (std::size_t st = 0; st + 1 < starts.size(); ++st)
                for (int k = starts[st] + 1; k < starts[st + 1]; ++k) {
                    const double rise = (tr[k] - tr[k - 1]) / std::max(1.0, std::abs(tr[k - 1]));
                    if (rise > 1e-9) ++rises;
                    worst_rise = std::max(worst_rise, rise);
                }
            if (d.kind == Domain::Kind::Ideal) {
                max_it = std::max(max_it, r.state.iterations);
                if (r.state.iterations > 50) ++over;
                if (!r.converged) ++unconverged;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = rises == 0 && over == 0 && unconverged == 0 && secs < 120.0;
    return {ok, fmt("%d runs (1 cell, 5 UEs, 20 elements; absolute and relative eps), %d rises (worst %.2e), "
                    "D1 iterations max %d, "
                    "%d unconverged, %.1fs",
                    runs, rises, worst_rise, max_it, unconverged, secs)};
}

// ---------------------------------------------------------------------------
// 3. Load coupling: convergent, monotone from zero, standard interference map.
// ---------------------------------------------------------------------------

Verdict coupling_map() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alphaU(1.0, 10.0), U01(0.0, 1.0);
    int instances = 0, diverged = 0, nonmono = 0, scal_fail = 0, mono_fail = 0, iters_max = 0;
    double res_max = 0.0;
    std::string skipped;
    for (std::uint64_t seed = 1; instances < 20 && seed <= 40; ++seed) {
        Layout lay;  // 7 cells, 20 elements per surface
        DemandSpec dem;
        dem.uniform = 0.2 * 0.05;
        const Scenario s = generate_scenario(lay, PathLossParams{}, dem, seed);
        const PhaseConfig p = random_phase_config(s, seed + 500);
        std::vector<LoadVector> hist;
        FixedPointOptions fp;
        fp.history = &hist;
        CouplingReport rep;
        try {
            rep = fixed_point_loads(s, p, fp);
        } catch (const NonConvergence&) {
            // No finite fixed point for this draw; the iterates must still
            // rise monotonically on their way out.
            ++diverged;
            skipped += (skipped.empty() ? "" : ",") + std::to_string(seed);
            for (std::size_t k = 1; k < hist.size(); ++k)
                if (((hist[k] - hist[k - 1]).array() < -1e-12).any()) ++nonmono;
            continue;
        }
        ++instances;
        res_max = std::max(res_max, rep.residual);
        iters_max = std::max(iters_max, rep.iterations);
        for (std::size_t k = 1; k < hist.size(); ++k)
            if (((hist[k] - hist[k - 1]).array() < -1e-12).any()) ++nonmono;

        const int I = s.num_cells();
        auto G = [&](const LoadVector& r) {
            LoadVector out(I);
            for (int i = 0; i < I; ++i) out[i] = cell_load(s, p, r, i);
            return out;
        };
        for (int k = 0; k < 100; ++k) {
            LoadVector r = rep.loads.cwiseProduct(LoadVector::NullaryExpr(I, [&] { return 0.5 + U01(rng); }));
            const double a = alphaU(rng);
            // alpha * G(r) > G(alpha * r), strictly in every component.
            if (!((a * G(r) - G(a * r)).array() > 0.0).all()) ++scal_fail;
            const LoadVector r2 = r + LoadVector::NullaryExpr(I, [&] { return 0.2 * U01(rng); });
            if (((G(r2) - G(r)).array() < 0.0).any()) ++mono_fail;
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = instances == 20 && res_max <= 1e-6 && nonmono == 0 && scal_fail == 0 && mono_fail == 0 &&
                    secs < 120.0;
    return {ok, fmt("%d instances (7 cells, 140 elements, d=0.2; %d draws without a finite fixed point skipped: %s), "
                    "residual max %.2e, iterations max %d, %d non-monotone iterates, scalability %d/2000 fail, "
                    "monotonicity %d/2000 fail, %.1fs",
                    instances, diverged, skipped.empty() ? "none" : skipped.c_str(), res_max, iters_max, nonmono,
                    scal_fail, mono_fail, secs)};
}

// ---------------------------------------------------------------------------
// 4. Interior-point solution against the elimination oracle.
// ---------------------------------------------------------------------------

Verdict subproblem_solver() {
    const auto t0 = Clock::now();
    SolverOptions opt;
    opt.verify = true;
    double worst_rel = 0.0, worst_kkt = 0.0;
    int bad_status = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SmallSubproblem p = small_subproblem(seed);
        const ConvexSubproblem sp = assemble_p23(p.ctx, p.point, {MajorizerWeighting::Balanced});
        const SubproblemSolution sol = solve(sp, opt);
        if (sol.status != SolveStatus::Optimal) {
            ++bad_status;
            continue;
        }
        const double ref = MajorizedLoadOracle(p.ctx, p.point, MajorizerWeighting::Balanced).minimize(p.point.phi);
        worst_rel = std::max(worst_rel, std::abs(sol.objective_value - ref) / std::abs(ref));
        worst_kkt = std::max(worst_kkt, sol.kkt_residual);
    }
    const double secs = seconds_since(t0);
    const bool ok = bad_status == 0 && worst_rel <= 1e-3 && worst_kkt <= 1e-7;
    return {ok, fmt("20 instances (Q=4, T=2), %d not optimal, max relative gap %.2e, max KKT residual %.2e, %.1fs",
                    bad_status, worst_rel, worst_kkt, secs)};
}

// ---------------------------------------------------------------------------
// Shared network runs for 6-10.
// ---------------------------------------------------------------------------

struct Point {
    double demand = 0.4;
    int ris = 7;
    double alpha = 2.2;
    auto operator<=>(const Point&) const = default;
};

ExperimentConfig network_config(const Point& pt) {
    ExperimentConfig c;
    c.layout.elements_per_ris = 4;
    c.layout.ris_per_cell = pt.ris;
    c.pathloss.alpha_ci = c.pathloss.alpha_iu = pt.alpha;
    c.demand = pt.demand;
    return c;
}

class RunCache {
public:
    /// Total load, or nothing when the scheme found no finite fixed point.
    const std::optional<Solution>& get(const Point& pt, std::uint64_t seed, const std::string& scheme) {
        const auto key = std::make_tuple(pt, seed, scheme);
        auto it = runs_.find(key);
        if (it != runs_.end()) return it->second;
        const ExperimentConfig c = network_config(pt);
        std::optional<Solution> out;
        try {
            const Scenario s = c.make_scenario(0.0, seed);
            Solution sol = run_scheme(s, SchemeSpec::parse(scheme), seed, c);
            if (std::isfinite(sol.total_load)) out = std::move(sol);
        } catch (const std::exception&) {
        }
        return runs_.emplace(key, std::move(out)).first->second;
    }

    /// Every ICA run made so far.
    std::vector<const Solution*> ica_runs() const {
        std::vector<const Solution*> v;
        for (const auto& [k, sol] : runs_)
            if (sol && std::get<2>(k).rfind("ICA", 0) == 0) v.push_back(&*sol);
        return v;
    }

private:
    std::map<std::tuple<Point, std::uint64_t, std::string>, std::optional<Solution>> runs_;
};

/// First `want` seeds on which every scheme has a finite fixed point at
/// every point; seeds skipped on the way are listed in `skipped`.
std::vector<std::uint64_t> valid_seeds(RunCache& cache, const std::vector<Point>& pts,
                                       const std::vector<std::string>& schemes, int want, std::string& skipped) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t seed = 1; seed <= 20 && static_cast<int>(out.size()) < want; ++seed) {
        bool ok = true;
        for (const Point& p : pts)
            for (const std::string& sc : schemes)
                if (ok && !cache.get(p, seed, sc)) ok = false;
        if (ok)
            out.push_back(seed);
        else
            skipped += (skipped.empty() ? "" : ",") + std::to_string(seed);
    }
    return out;
}

double mean_load(RunCache& cache, const Point& p, const std::vector<std::uint64_t>& seeds, const std::string& sc) {
    double acc = 0.0;
    for (auto seed : seeds) acc += cache.get(p, seed, sc)->total_load;
    return acc / static_cast<double>(seeds.size());
}

// ---------------------------------------------------------------------------
// 5. ICA-D3(4) against the exhaustive-inner global scheme.
// ---------------------------------------------------------------------------

Verdict discrete_vs_global(std::vector<Solution>& ica_out) {
    const auto t0 = Clock::now();
    ExperimentConfig c;
    c.layout.num_cells = 3;
    c.layout.ues_per_cell = 2;
    c.layout.ris_per_cell = 1;
    c.layout.elements_per_ris = 4;
    c.layout.wraparound = false;
    int above = 0, below = 0, failed = 0;
    double worst_above = 0.0, worst_below = 0.0;
    for (int k = 1; k <= 10; ++k) {
        c.demand = 1.0 + (k - 1) % 5;
        const Scenario s = c.make_scenario(0.0, static_cast<std::uint64_t>(k));
        try {
            const Solution g = run_scheme(s, SchemeSpec::parse("GlobalD3(4)"), k, c);
            Solution d = run_scheme(s, SchemeSpec::parse("ICA-D3(4)"), k, c);
            const double rel = (d.total_load - g.total_load) / g.total_load;
            if (rel > 0.05) ++above;
            if (rel < -1e-9) ++below;
            worst_above = std::max(worst_above, rel);
            worst_below = std::min(worst_below, rel);
            ica_out.push_back(std::move(d));
        } catch (const std::exception&) {
            ++failed;
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = above == 0 && below == 0 && failed == 0 && secs < 600.0;
    return {ok, fmt("10 instances (3 cells, 4 elements, N=4), %d failed, %d more than 5%% above global "
                    "(max %+.2f%%), %d below global (min %+.2f%%), %.1fs",
                    failed, above, 100.0 * worst_above, below, 100.0 * worst_below, secs)};
}

// ---------------------------------------------------------------------------
// 6. Load savings at the default operating point.
// ---------------------------------------------------------------------------

Verdict savings(RunCache& cache) {
    const auto t0 = Clock::now();
    const Point p;
    const std::vector<std::string> schemes{"NoRIS", "Random", "ICA-D1", "ICA-D3(2)"};
    std::string skipped;
    const auto seeds = valid_seeds(cache, {p}, schemes, 5, skipped);
    if (seeds.size() < 5) return {false, "fewer than 5 seeds with finite loads for every scheme"};
    const double none = mean_load(cache, p, seeds, "NoRIS"), rnd = mean_load(cache, p, seeds, "Random");
    const double d1 = mean_load(cache, p, seeds, "ICA-D1"), d3 = mean_load(cache, p, seeds, "ICA-D3(2)");
    const double s1 = 1.0 - d1 / none, s3 = 1.0 - d3 / none, dr = rnd / none - 1.0;
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    const double secs = seconds_since(t0);
    const bool ok = in(s1, 0.35, 0.65) && in(s3, 0.25, 0.55) && std::abs(dr) <= 0.10 && secs < 1800.0;
    return {ok, fmt("d=0.4, S_i=28, %zu seeds (skipped: %s), mean load No-RIS %.4f Random %.4f ICA-D1 %.4f "
                    "ICA-D3(2) %.4f; ICA-D1 saves %.1f%%, ICA-D3(2) saves %.1f%%, Random vs No-RIS %+.1f%%, %.1fs",
                    seeds.size(), skipped.empty() ? "none" : skipped.c_str(), none, rnd, d1, d3, 100 * s1, 100 * s3,
                    100 * dr, secs)};
}

// ---------------------------------------------------------------------------
// 7. Unit modulus costs little, and the ideal optimum has near-unit amplitudes.
// ---------------------------------------------------------------------------

Verdict unit_modulus_gap(RunCache& cache) {
    const auto t0 = Clock::now();
    const Point p;
    std::string skipped;
    const auto seeds = valid_seeds(cache, {p}, {"ICA-D1", "ICA-D2"}, 5, skipped);
    if (seeds.size() < 5) return {false, "fewer than 5 seeds with finite loads"};
    double worst_gap = 0.0, min_amp = 1e300;
    for (auto seed : seeds) {
        const Solution& d1 = *cache.get(p, seed, "ICA-D1");
        const Solution& d2 = *cache.get(p, seed, "ICA-D2");
        worst_gap = std::max(worst_gap, (d2.total_load - d1.total_load) / d1.total_load);
        min_amp = std::min(min_amp, d1.phases.phi.cwiseAbs().minCoeff());
    }
    const double secs = seconds_since(t0);
    const bool ok = worst_gap <= 0.03 && min_amp >= 0.99;
    return {ok, fmt("%zu seeds, max (D2 - D1)/D1 %+.2f%%, min |phi| at the D1 solution %.3f, %.1fs", seeds.size(),
                    100 * worst_gap, min_amp, secs)};
}

// ---------------------------------------------------------------------------
// 8. Trends of the seed-averaged ICA-D1 load.
// ---------------------------------------------------------------------------

Verdict trends(RunCache& cache) {
    const auto t0 = Clock::now();
    const std::string sc = "ICA-D1";
    std::string out;
    bool ok = true;
    auto check = [&](const char* name, const std::vector<Point>& pts, const std::vector<double>& axis, int sign) {
        std::string skipped;
        const auto seeds = valid_seeds(cache, pts, {sc}, 5, skipped);
        if (seeds.size() < 5) {
            ok = false;
            out += fmt("%s: fewer than 5 seeds; ", name);
            return;
        }
        std::string series;
        double prev = 0.0;
        bool good = true;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double m = mean_load(cache, pts[k], seeds, sc);
            series += fmt("%s%g:%.4f", k ? " " : "", axis[k], m);
            // sign +1: non-decreasing, -1: non-increasing, each with 1% slack.
            if (k > 0 && (sign > 0 ? m < prev * 0.99 : m > prev * 1.01)) good = false;
            prev = m;
        }
        ok = ok && good;
        out += fmt("%s %s [%s] skipped{%s}; ", name, good ? "ok" : "VIOLATED", series.c_str(),
                   skipped.empty() ? "" : skipped.c_str());
    };
    {
        std::vector<Point> pts;
        std::vector<double> ax{0.4, 0.5, 0.6, 0.7, 0.8};
        for (double d : ax) pts.push_back({d, 7, 2.2});
        check("demand up", pts, ax, +1);
    }
    {
        std::vector<Point> pts;
        std::vector<double> ax{20, 24, 28, 32, 36};
        for (int r = 5; r <= 9; ++r) pts.push_back({0.4, r, 2.2});
        check("elements down", pts, ax, -1);
    }
    {
        std::vector<Point> pts;
        std::vector<double> ax{2.0, 2.2, 2.4, 2.6};
        for (double a : ax) pts.push_back({0.4, 7, a});
        check("alpha up", pts, ax, +1);
    }
    return {ok, out + fmt("%.1fs", seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 9. ICA convergence speed.
// ---------------------------------------------------------------------------

Verdict ica_convergence(RunCache& cache) {
    const auto t0 = Clock::now();
    const Point p;
    std::string skipped;
    const auto seeds = valid_seeds(cache, {p}, {"ICA-D1"}, 5, skipped);
    if (seeds.size() < 5) return {false, "fewer than 5 seeds with finite loads"};
    int slow = 0, stalls = 0, worst_sweeps = 0;
    for (auto seed : seeds) {
        const std::vector<double>& r = cache.get(p, seed, "ICA-D1")->residual_trace;
        int reach = -1;
        for (std::size_t k = 0; k < r.size(); ++k)
            if (r[k] <= 1e-4) {
                reach = static_cast<int>(k) + 1;
                break;
            }
        if (reach < 0 || reach > 15) ++slow;
        worst_sweeps = std::max(worst_sweeps, reach < 0 ? static_cast<int>(r.size()) : reach);
        // Residual at sweep k+4 at most a tenth of sweep k, until tolerance.
        const int last = reach < 0 ? static_cast<int>(r.size()) : reach;
        for (int k = 0; k + 4 < last; ++k)
            if (r[k + 4] > r[k] / 10.0) ++stalls;
    }
    const bool ok = slow == 0 && stalls == 0;
    return {ok, fmt("%zu seeds, sweeps to 1e-4 max %d, %d runs over 15 sweeps, %d windows of 4 sweeps with less "
                    "than a 10x drop, %.1fs",
                    seeds.size(), worst_sweeps, slow, stalls, seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 10. Every ICA run: first sweep lowers every load, totals never rise.
// ---------------------------------------------------------------------------

Verdict ica_descent(const std::vector<const Solution*>& runs) {
    int first_fail = 0, total_fail = 0;
    double worst = 0.0;
    for (const Solution* s : runs) {
        const auto& h = s->load_history;
        if (h.size() >= 2 && ((h[1] - h[0]).array() > 1e-9 * std::max(1.0, h[0].maxCoeff())).any()) ++first_fail;
        bool bad = false;
        for (std::size_t k = 1; k < h.size(); ++k) {
            const double rise = (h[k].sum() - h[k - 1].sum()) / std::max(1e-300, h[k - 1].sum());
            worst = std::max(worst, rise);
            if (rise > 1e-9) bad = true;
        }
        if (bad) ++total_fail;
    }
    const bool ok = !runs.empty() && first_fail == 0 && total_fail == 0;
    return {ok, fmt("%zu ICA runs, %d with a cell load rising in sweep 1, %d with a rising total "
                    "(worst relative rise %.2e)",
                    runs.size(), first_fail, total_fail, worst)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> want;
    for (int k = 1; k < argc; ++k) want.insert(std::atoi(argv[k]));
    auto on = [&](int c) { return want.empty() || want.count(c) > 0; };
    if (want.count(10)) want.insert({5, 6, 7, 8, 9});

    int failures = 0;
    auto report = [&](int id, const char* name, const Verdict& v) {
        std::printf("criterion %2d %-22s %s  %s\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failures;
    };

    RunCache cache;
    std::vector<Solution> small_ica;
    if (on(1)) report(1, "majorizer", majorizer());
    if (on(2)) report(2, "mm-monotone", mm_monotone());
    if (on(3)) report(3, "load-coupling", coupling_map());
    if (on(4)) report(4, "subproblem-solver", subproblem_solver());
    if (on(5)) report(5, "discrete-vs-global", discrete_vs_global(small_ica));
    if (on(6)) report(6, "savings", savings(cache));
    if (on(7)) report(7, "unit-modulus", unit_modulus_gap(cache));
    if (on(8)) report(8, "trends", trends(cache));
    if (on(9)) report(9, "ica-convergence", ica_convergence(cache));
    if (on(10)) {
        std::vector<const Solution*> runs = cache.ica_runs();
        for (const Solution& s : small_ica) runs.push_back(&s);
        report(10, "ica-descent", ica_descent(runs));
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
