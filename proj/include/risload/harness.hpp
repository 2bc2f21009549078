// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment engine: JSON configs, seeded sweeps, CSV result tables and
// plot-ready series.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "risload/baselines.hpp"
#include "risload/error.hpp"
#include "risload/ica.hpp"
#include "risload/scenario.hpp"
#include "risload/scenario_io.hpp"

namespace risload {

inline constexpr int kConfigSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Schemes and sweep axes
// ---------------------------------------------------------------------------

struct SchemeSpec {
    enum class Kind { NoRis, Random, Decomp1, Decomp2, IcaD1, IcaD2, IcaD3, GlobalD3 };
    Kind kind = Kind::NoRis;
    int levels = 0;  // N for the discrete schemes

    /// Label used in result tables; equals Solution::scheme.
    std::string label() const {
        switch (kind) {
            case Kind::NoRis: return "No-RIS";
            case Kind::Random: return "Random-D1";
            case Kind::Decomp1: return "Decomposition-1";
            case Kind::Decomp2: return "Decomposition-2";
            case Kind::IcaD1: return "ICA-D1";
            case Kind::IcaD2: return "ICA-D2";
            case Kind::IcaD3: return "ICA-D3(" + std::to_string(levels) + ")";
            case Kind::GlobalD3: return "Global-D3(" + std::to_string(levels) + ")";
        }
        return "?";
    }

    /// Accepts the table labels and the short config names
    /// (NoRIS, Random, Decomp1, Decomp2, ICA-D3(N), GlobalD3(N)).
    static SchemeSpec parse(const std::string& name) {
        static const std::map<std::string, Kind> simple = {
            {"NoRIS", Kind::NoRis},           {"No-RIS", Kind::NoRis},        {"Random", Kind::Random},
            {"Random-D1", Kind::Random},      {"Decomp1", Kind::Decomp1},     {"Decomposition-1", Kind::Decomp1},
            {"Decomp2", Kind::Decomp2},       {"Decomposition-2", Kind::Decomp2}, {"ICA-D1", Kind::IcaD1},
            {"ICA-D2", Kind::IcaD2}};
        if (auto it = simple.find(name); it != simple.end()) return {it->second, 0};
        for (const auto& [prefix, kind] :
             {std::pair<std::string, Kind>{"ICA-D3(", Kind::IcaD3}, {"GlobalD3(", Kind::GlobalD3},
              {"Global-D3(", Kind::GlobalD3}}) {
            if (name.rfind(prefix, 0) != 0 || name.back() != ')') continue;
            const std::string num = name.substr(prefix.size(), name.size() - prefix.size() - 1);
            std::size_t used = 0;
            int n = 0;
            try {
                n = std::stoi(num, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != num.size() || n < 2) throw ConfigError("scheme '" + name + "': N must be an integer >= 2");
            return {kind, n};
        }
        throw ConfigError("unknown scheme '" + name + "'");
    }
    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

enum class SweepAxis { None, Demand, Elements, AlphaRis };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::None: return "none";
        case SweepAxis::Demand: return "demand";
        case SweepAxis::Elements: return "elements";
        case SweepAxis::AlphaRis: return "alpha_ris";
    }
    return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "none") return SweepAxis::None;
    if (s == "demand") return SweepAxis::Demand;
    if (s == "elements") return SweepAxis::Elements;
    if (s == "alpha_ris") return SweepAxis::AlphaRis;
    throw ConfigError("unknown sweep axis '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    Layout layout;
    PathLossParams pathloss;
    /// Demand on the figure axis (Mbps over the 20 MHz band); used when the
    /// sweep axis is not `demand`.
    double demand = 0.4;
    /// Factor turning the axis demand into the per-RB rate requirement in the
    /// load formula (1 Mbps / 20 MHz = 0.05 bit/s/Hz).
    double demand_scale = 0.05;
    std::vector<SchemeSpec> schemes;
    SweepAxis axis = SweepAxis::None;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    double eps = 1e-4;         // ICA outer tolerance
    double inner_eps = 1e-4;   // MM / decomposition tolerance
    double solver_tol = 1e-7;  // interior-point KKT target
    int max_sweeps = 100;
    std::uint64_t exhaustive_budget = std::uint64_t{1} << 20;

    void validate() const {
        if (schemes.empty()) throw ConfigError("config: schemes must not be empty");
        if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
        if (axis == SweepAxis::None && !values.empty()) throw ConfigError("config: axis 'none' takes no values");
        if (axis != SweepAxis::None && values.empty()) throw ConfigError("config: sweep values must not be empty");
        for (std::size_t k = 1; k < values.size(); ++k)
            if (!(values[k - 1] < values[k])) throw ConfigError("config: sweep values must be strictly ascending");
        if (!(demand >= 0.0)) throw ConfigError("config: demand must be >= 0");
        if (!(demand_scale > 0.0)) throw ConfigError("config: demand_scale must be > 0");
        if (!(eps > 0.0) || !(inner_eps > 0.0) || !(solver_tol > 0.0))
            throw ConfigError("config: tolerances must be > 0");
        if (max_sweeps < 1) throw ConfigError("config: max_sweeps must be >= 1");
        for (double v : values) {
            if (axis == SweepAxis::Demand && !(v >= 0.0)) throw ConfigError("config: demand values must be >= 0");
            if (axis == SweepAxis::Elements) {
                const double per = v / layout.elements_per_ris;
                if (!(per >= 0.0) || per != std::floor(per))
                    throw ConfigError("config: element counts must be multiples of elements_per_ris");
            }
        }
        for (std::size_t k = 0; k < std::max<std::size_t>(values.size(), 1); ++k) {
            const auto [l, p] = point_setup(values.empty() ? 0.0 : values[k]);
            l.validate();
            p.validate();
        }
    }

    /// Layout and path loss at one sweep value.
    std::pair<Layout, PathLossParams> point_setup(double value) const {
        Layout l = layout;
        PathLossParams p = pathloss;
        if (axis == SweepAxis::Elements) l.ris_per_cell = static_cast<int>(std::lround(value / l.elements_per_ris));
        if (axis == SweepAxis::AlphaRis) p.alpha_ci = p.alpha_iu = value;
        return {l, p};
    }

    double axis_demand(double value) const { return axis == SweepAxis::Demand ? value : demand; }

    Scenario make_scenario(double value, std::uint64_t seed) const {
        const auto [l, p] = point_setup(value);
        DemandSpec d;
        d.uniform = axis_demand(value) * demand_scale;
        return generate_scenario(l, p, d, seed);
    }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        detail::check_keys(j,
                           {"schema_version", "layout", "pathloss", "demand", "demand_scale", "schemes", "sweep",
                            "seeds", "eps", "inner_eps", "solver_tol", "max_sweeps", "exhaustive_budget"},
                           "config");
        if (!j.contains("schema_version")) throw ConfigError("config: schema_version is required");
        if (j.at("schema_version").get<int>() != kConfigSchemaVersion)
            throw ConfigError("config: unsupported schema_version " + j.at("schema_version").dump());
        ExperimentConfig c;
        if (j.contains("layout")) c.layout = layout_from_json(j.at("layout"));
        if (j.contains("pathloss")) c.pathloss = pathloss_from_json(j.at("pathloss"));
        c.demand = j.value("demand", c.demand);
        c.demand_scale = j.value("demand_scale", c.demand_scale);
        for (const auto& s : j.at("schemes")) c.schemes.push_back(SchemeSpec::parse(s.get<std::string>()));
        if (j.contains("sweep")) {
            const auto& sw = j.at("sweep");
            detail::check_keys(sw, {"axis", "values"}, "config sweep");
            c.axis = parse_axis(sw.at("axis").get<std::string>());
            if (sw.contains("values")) c.values = sw.at("values").get<std::vector<double>>();
        }
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.eps = j.value("eps", c.eps);
        c.inner_eps = j.value("inner_eps", c.inner_eps);
        c.solver_tol = j.value("solver_tol", c.solver_tol);
        c.max_sweeps = j.value("max_sweeps", c.max_sweeps);
        c.exhaustive_budget = j.value("exhaustive_budget", c.exhaustive_budget);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Runs one scheme on one instance. `seed` drives the random baseline.
inline Solution run_scheme(const Scenario& s, const SchemeSpec& spec, std::uint64_t seed,
                           const ExperimentConfig& cfg) {
    IcaOptions io;
    io.eps = cfg.eps;
    io.max_sweeps = cfg.max_sweeps;
    MmOptions mo;
    mo.eps = cfg.inner_eps;
    mo.solver.tol = cfg.solver_tol;
    switch (spec.kind) {
        case SchemeSpec::Kind::NoRis: return no_ris(s);
        case SchemeSpec::Kind::Random: return random_phases(s, seed);
        case SchemeSpec::Kind::Decomp1:
        case SchemeSpec::Kind::Decomp2: {
            DecompositionOptions d;
            d.eps = cfg.inner_eps;
            d.solver.tol = cfg.solver_tol;
            return decomposition(
                s, spec.kind == SchemeSpec::Kind::Decomp1 ? InterferenceMode::Zero : InterferenceMode::WorstCase, d);
        }
        case SchemeSpec::Kind::IcaD1: return ica(s, Domain::ideal(), io, mo);
        case SchemeSpec::Kind::IcaD2: return ica(s, Domain::unit_modulus(), io, mo);
        case SchemeSpec::Kind::IcaD3: return ica(s, Domain::discrete(spec.levels), io, mo);
        case SchemeSpec::Kind::GlobalD3: return global_opt_discrete(s, spec.levels, io, cfg.exhaustive_budget);
    }
    throw std::logic_error("unhandled scheme");
}

struct ResultRow {
    enum class Kind { Row, Mean };
    Kind kind = Kind::Row;
    std::string scheme;
    SweepAxis axis = SweepAxis::None;
    double value = 0.0;
    std::int64_t seed = -1;  // -1 on aggregate rows
    double total_load = 0.0;
    double std_dev = 0.0;  // aggregates only
    int count = 1;         // seeds with a finite total (aggregates)
    bool feasible = true;
    int sweeps = 0;
    double wall_time = 0.0;
    std::string status = "ok";
    std::vector<double> trace;  // ICA residual trace
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

inline bool row_order(const ResultRow& a, const ResultRow& b) {
    return std::tuple(a.scheme, a.value, static_cast<int>(a.kind), a.seed) <
           std::tuple(b.scheme, b.value, static_cast<int>(b.kind), b.seed);
}

/// Mean and sample std over the finite per-seed totals of each (scheme, value).
inline std::vector<ResultRow> aggregate(const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> groups;
    for (const ResultRow& r : rows)
        if (r.kind == ResultRow::Kind::Row) groups[{r.scheme, r.value}].push_back(&r);
    std::vector<ResultRow> out;
    for (const auto& [key, members] : groups) {
        ResultRow a;
        a.kind = ResultRow::Kind::Mean;
        a.scheme = key.first;
        a.value = key.second;
        a.axis = members.front()->axis;
        a.count = 0;
        double sum = 0.0, sq = 0.0;
        for (const ResultRow* r : members) {
            a.feasible = a.feasible && r->feasible && r->status == "ok";
            a.sweeps = std::max(a.sweeps, r->sweeps);
            a.wall_time += r->wall_time;
            if (!std::isfinite(r->total_load)) continue;
            ++a.count;
            sum += r->total_load;
            sq += r->total_load * r->total_load;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        a.total_load = a.count > 0 ? sum / a.count : nan;
        a.std_dev = a.count > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / a.count) / (a.count - 1))) : 0.0;
        a.status = a.count == static_cast<int>(members.size()) ? "ok" : "partial";
        out.push_back(std::move(a));
    }
    return out;
}

inline std::string status_of(const std::exception& e) {
    if (dynamic_cast<const NonConvergence*>(&e)) return "nonconvergence";
    if (dynamic_cast<const DemandUnservable*>(&e)) return "demand_unservable";
    if (dynamic_cast<const SolverFailure*>(&e)) return "solver_failure";
    if (dynamic_cast<const BudgetExceeded*>(&e)) return "budget_exceeded";
    return "error";
}

/// Every scheme runs on the same instance for a given (value, seed). Failures
/// are recorded in the row and the run continues.
inline ResultTable run_experiment(const ExperimentConfig& cfg,
                                  const std::function<void(const ResultRow&)>& progress = {}) {
    cfg.validate();
    ResultTable table;
    const std::vector<double> values = cfg.values.empty() ? std::vector<double>{0.0} : cfg.values;
    for (double v : values)
        for (std::uint64_t seed : cfg.seeds) {
            std::optional<Scenario> s;
            std::string gen_error;
            try {
                s = cfg.make_scenario(v, seed);
            } catch (const std::exception& e) {
                gen_error = status_of(e);
            }
            for (const SchemeSpec& spec : cfg.schemes) {
                ResultRow r;
                r.scheme = spec.label();
                r.axis = cfg.axis;
                r.value = v;
                r.seed = static_cast<std::int64_t>(seed);
                const auto t0 = std::chrono::steady_clock::now();
                if (!s) {
                    r.status = gen_error;
                    r.total_load = std::numeric_limits<double>::infinity();
                    r.feasible = false;
                } else {
                    try {
                        const Solution sol = run_scheme(*s, spec, seed, cfg);
                        r.total_load = sol.total_load;
                        r.feasible = sol.feasible;
                        r.sweeps = sol.sweeps;
                        r.trace = sol.residual_trace;
                        if (!sol.converged) r.status = "sweep_cap";
                    } catch (const std::exception& e) {
                        r.status = status_of(e);
                        r.total_load = std::numeric_limits<double>::infinity();
                        r.feasible = false;
                    }
                }
                r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (progress) progress(r);
                table.rows.push_back(std::move(r));
            }
        }
    for (ResultRow& a : aggregate(table.rows)) table.rows.push_back(std::move(a));
    std::sort(table.rows.begin(), table.rows.end(), row_order);
    return table;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "kind,scheme,axis,value,seed,total_load,std,count,feasible,sweeps,wall_time,status,trace";

inline std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Rows in table order. Floats use 9 significant digits; the trace column is
/// a ';'-separated list.
inline void emit_csv(const ResultTable& t, std::ostream& os) {
    os << kCsvHeader << "\n";
    for (const ResultRow& r : t.rows) {
        os << (r.kind == ResultRow::Kind::Row ? "row" : "mean") << ',' << r.scheme << ',' << to_string(r.axis) << ','
           << fmt9(r.value) << ',';
        if (r.seed >= 0) os << r.seed;
        os << ',' << fmt9(r.total_load) << ',' << fmt9(r.std_dev) << ',' << r.count << ',' << (r.feasible ? 1 : 0)
           << ',' << r.sweeps << ',' << fmt9(r.wall_time) << ',' << r.status << ',';
        for (std::size_t k = 0; k < r.trace.size(); ++k) os << (k ? ";" : "") << fmt9(r.trace[k]);
        os << "\n";
    }
}

inline void emit_csv(const ResultTable& t, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    emit_csv(t, os);
    if (!os) throw ConfigError("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("csv: bad number '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw ConfigError("csv: bad integer '" + s + "'");
    return v;
}

}  // namespace detail

inline ResultTable parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError("csv: missing or unexpected header");
    ResultTable t;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 13) throw ConfigError("csv line " + std::to_string(lineno) + ": expected 13 fields");
        ResultRow r;
        if (f[0] == "row")
            r.kind = ResultRow::Kind::Row;
        else if (f[0] == "mean")
            r.kind = ResultRow::Kind::Mean;
        else
            throw ConfigError("csv line " + std::to_string(lineno) + ": bad kind");
        r.scheme = f[1];
        r.axis = parse_axis(f[2]);
        r.value = detail::parse_double(f[3]);
        r.seed = f[4].empty() ? -1 : detail::parse_int(f[4]);
        r.total_load = detail::parse_double(f[5]);
        r.std_dev = detail::parse_double(f[6]);
        r.count = static_cast<int>(detail::parse_int(f[7]));
        r.feasible = detail::parse_int(f[8]) != 0;
        r.sweeps = static_cast<int>(detail::parse_int(f[9]));
        r.wall_time = detail::parse_double(f[10]);
        r.status = f[11];
        if (!f[12].empty())
            for (const std::string& v : detail::split(f[12], ';')) r.trace.push_back(detail::parse_double(v));
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline ResultTable load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    return parse_csv(is);
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

enum class Figure { Fig1, Fig2, Fig3, Fig5 };

inline Figure parse_figure(const std::string& s) {
    if (s == "fig1") return Figure::Fig1;
    if (s == "fig2") return Figure::Fig2;
    if (s == "fig3") return Figure::Fig3;
    if (s == "fig5") return Figure::Fig5;
    throw ConfigError("unknown figure '" + s + "' (expected fig1, fig2, fig3 or fig5)");
}

/// Columnar text, one block per series separated by two blank lines (gnuplot
/// `index` layout). Figures 1-3: x mean std count, from per-seed rows.
/// Figure 5: iteration and residual per traced run; zero residuals are
/// dropped so every value is log-scale ready.
inline void emit_plot_data(const ResultTable& t, Figure fig, std::ostream& os) {
    if (fig == Figure::Fig5) {
        std::vector<const ResultRow*> traced;
        for (const ResultRow& r : t.rows)
            if (r.kind == ResultRow::Kind::Row && !r.trace.empty()) traced.push_back(&r);
        if (traced.empty()) throw MissingSeries("fig5 needs rows with residual traces");
        os << "# risload plot-data fig5\n# x: ICA iteration\n# y: max-norm load residual\n";
        bool first = true;
        for (const ResultRow* r : traced) {
            if (!first) os << "\n\n";
            first = false;
            os << "# series " << r->scheme << " seed=" << r->seed << " value=" << fmt9(r->value) << "\n";
            os << "iteration residual\n";
            for (std::size_t k = 0; k < r->trace.size(); ++k)
                if (r->trace[k] > 0.0) os << k + 1 << ' ' << fmt9(r->trace[k]) << "\n";
        }
        return;
    }
    const SweepAxis need = fig == Figure::Fig1 ? SweepAxis::Demand
                           : fig == Figure::Fig2 ? SweepAxis::Elements
                                                 : SweepAxis::AlphaRis;
    const char* name = fig == Figure::Fig1 ? "fig1" : fig == Figure::Fig2 ? "fig2" : "fig3";
    const char* xlabel = fig == Figure::Fig1   ? "normalized demand d (Mbps)"
                         : fig == Figure::Fig2 ? "reflection elements per cell S_i"
                                               : "RIS path-loss exponent alpha_RIS";
    std::vector<ResultRow> rows;
    for (const ResultRow& r : t.rows)
        if (r.kind == ResultRow::Kind::Row && r.axis == need) rows.push_back(r);
    if (rows.empty()) throw MissingSeries(std::string(name) + " needs a '" + to_string(need) + "' sweep");
    std::vector<ResultRow> agg = aggregate(rows);
    std::sort(agg.begin(), agg.end(), row_order);
    os << "# risload plot-data " << name << "\n# x: " << xlabel << "\n# y: total load\n";
    std::string current;
    for (const ResultRow& a : agg) {
        if (a.scheme != current) {
            if (!current.empty()) os << "\n\n";
            current = a.scheme;
            os << "# series " << a.scheme << "\nx mean std count\n";
        }
        os << fmt9(a.value) << ' ' << fmt9(a.total_load) << ' ' << fmt9(a.std_dev) << ' ' << a.count << "\n";
    }
}

inline void emit_plot_data(const ResultTable& t, Figure fig, const std::string& path) {
    std::ostringstream buf;
    emit_plot_data(t, fig, buf);
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << buf.str();
}

}  // namespace risload
