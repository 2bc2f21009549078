// SPDX-License-Identifier: Apache-2.0
// risload: scenario generation, experiment sweeps, small-instance global
// oracle and plot-data export.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure
// (a failed row under --strict, or a failed oracle run).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "risload/risload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> eps;
};

risload::ExperimentConfig base_config(const Common& c) {
    risload::ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = risload::load_config(c.config);
    } else {
        cfg.schemes = {risload::SchemeSpec{}};
        cfg.seeds = {1};
    }
    if (c.seed) cfg.seeds = {*c.seed};
    if (c.eps) cfg.eps = *c.eps;
    cfg.validate();
    return cfg;
}

/// Writes to --out when given, stdout otherwise.
template <class F>
void with_output(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw risload::ConfigError("cannot write " + path);
    write(os);
}

int cmd_generate(const Common& c, std::optional<double> value) {
    const risload::ExperimentConfig cfg = base_config(c);
    double v = value.value_or(cfg.values.empty() ? 0.0 : cfg.values.front());
    const risload::Scenario s = cfg.make_scenario(v, cfg.seeds.front());
    with_output(c.out, [&](std::ostream& os) { os << risload::scenario_to_json(s).dump(1) << "\n"; });
    return kExitOk;
}

int cmd_run(const Common& c, bool strict, bool quiet) {
    const risload::ExperimentConfig cfg = base_config(c);
    bool failed = false;
    const risload::ResultTable t = risload::run_experiment(cfg, [&](const risload::ResultRow& r) {
        if (r.status != "ok") failed = true;
        if (!quiet)
            std::fprintf(stderr, "%-16s value=%-8g seed=%-4lld total=%-12.6g sweeps=%-3d %6.2fs %s\n",
                         r.scheme.c_str(), r.value, static_cast<long long>(r.seed), r.total_load, r.sweeps,
                         r.wall_time, r.status.c_str());
    });
    with_output(c.out, [&](std::ostream& os) { risload::emit_csv(t, os); });
    return strict && failed ? kExitNumerical : kExitOk;
}

int cmd_oracle(const Common& c, const std::string& scenario_path, int levels) {
    risload::IcaOptions io;
    risload::ExperimentConfig cfg;
    std::vector<std::pair<std::uint64_t, risload::Scenario>> instances;
    if (!scenario_path.empty()) {
        risload::Scenario s = risload::load_scenario(scenario_path);
        instances.emplace_back(s.seed(), std::move(s));
        if (c.eps) cfg.eps = *c.eps;
    } else {
        cfg = base_config(c);
        for (std::uint64_t seed : cfg.seeds)
            instances.emplace_back(seed, cfg.make_scenario(cfg.values.empty() ? 0.0 : cfg.values.front(), seed));
    }
    io.eps = cfg.eps;
    io.max_sweeps = cfg.max_sweeps;
    risload::MmOptions mo;
    mo.eps = cfg.inner_eps;
    mo.solver.tol = cfg.solver_tol;

    bool failed = false;
    with_output(c.out, [&](std::ostream& os) {
        os << "seed,global_total,ica_total,gap,global_sweeps,ica_sweeps\n";
        for (const auto& [seed, s] : instances) {
            try {
                const risload::Solution g = risload::global_opt_discrete(s, levels, io, cfg.exhaustive_budget);
                const risload::Solution a = risload::ica(s, risload::Domain::discrete(levels), io, mo);
                os << seed << ',' << risload::fmt9(g.total_load) << ',' << risload::fmt9(a.total_load) << ','
                   << risload::fmt9(a.total_load / g.total_load - 1.0) << ',' << g.sweeps << ',' << a.sweeps << "\n";
                failed = failed || !g.converged;
            } catch (const risload::ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                os << seed << ",nan,nan,nan,0,0\n";
                std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
                failed = true;
            }
        }
    });
    return failed ? kExitNumerical : kExitOk;
}

int cmd_plot(const Common& c, const std::string& in, const std::string& figure) {
    const risload::ResultTable t = risload::load_csv(in);
    const risload::Figure f = risload::parse_figure(figure);
    with_output(c.out, [&](std::ostream& os) { risload::emit_plot_data(t, f, os); });
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Load minimization in RIS-assisted multi-cell networks"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", c.config, "Experiment config (JSON)");
        sub->add_option("--out", c.out, "Output file (default: stdout)");
        sub->add_option("--seed", c.seed, "Use this single seed instead of the config's list");
        sub->add_option("--eps", c.eps, "Outer ICA tolerance")->check(CLI::PositiveNumber);
    };

    auto* gen = app.add_subcommand("generate", "Write one scenario instance as JSON");
    add_common(gen);
    std::optional<double> gen_value;
    gen->add_option("--value", gen_value, "Sweep-axis value for the instance (default: first config value)");

    auto* run = app.add_subcommand("run", "Run an experiment config and write the result CSV");
    add_common(run);
    bool strict = false, quiet = false;
    run->add_flag("--strict", strict, "Exit with code 3 if any row failed numerically");
    run->add_flag("--quiet", quiet, "No per-row progress on stderr");

    auto* orc = app.add_subcommand("oracle", "Exhaustive global optimum vs ICA on small discrete instances");
    add_common(orc);
    std::string scenario_path;
    int levels = 4;
    orc->add_option("--scenario", scenario_path, "Scenario file (overrides --config)");
    orc->add_option("--levels", levels, "Discrete phase levels N")->check(CLI::Range(2, 64));

    auto* plot = app.add_subcommand("plot-data", "Turn a result CSV into figure series");
    add_common(plot);
    std::string in, figure;
    plot->add_option("--in", in, "Result CSV")->required();
    plot->add_option("--figure", figure, "fig1 | fig2 | fig3 | fig5")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*gen) return cmd_generate(c, gen_value);
        if (*run) return cmd_run(c, strict, quiet);
        if (*orc) return cmd_oracle(c, scenario_path, levels);
        if (*plot) return cmd_plot(c, in, figure);
    } catch (const risload::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const risload::MissingSeries& e) {
        std::fprintf(stderr, "missing series: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
