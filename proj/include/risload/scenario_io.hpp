// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario files: JSON with a format tag and version. Complex entries are
// [re, im] pairs; matrices are arrays of rows. The cascade tensor is not
// stored, it is rebuilt on load.

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "risload/error.hpp"
#include "risload/scenario.hpp"

namespace risload {

inline constexpr int kScenarioFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXcd complex_matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                                 const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw ConfigError(std::string("scenario file: ") + what + " has wrong row count");
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError(std::string("scenario file: ") + what + " has wrong column count");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = row[c];
            if (!e.is_array() || e.size() != 2)
                throw ConfigError(std::string("scenario file: ") + what + " entry is not [re, im]");
            m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

inline json points_to_json(const std::vector<Point>& pts) {
    json a = json::array();
    for (const Point& p : pts) a.push_back({p.x, p.y});
    return a;
}

inline std::vector<Point> points_from_json(const json& j) {
    std::vector<Point> out;
    for (const json& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace detail

inline nlohmann::json layout_to_json(const Layout& l) {
    return {{"num_cells", l.num_cells},           {"cell_radius", l.cell_radius},
            {"ris_per_cell", l.ris_per_cell},     {"elements_per_ris", l.elements_per_ris},
            {"ues_per_cell", l.ues_per_cell},     {"ris_bs_distance", l.ris_bs_distance},
            {"wraparound", l.wraparound},         {"min_distance", l.min_distance}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline Layout layout_from_json(const nlohmann::json& j, Layout l = {}) {
    detail::check_keys(j,
                       {"num_cells", "cell_radius", "ris_per_cell", "elements_per_ris", "ues_per_cell",
                        "ris_bs_distance", "wraparound", "min_distance"},
                       "layout");
    l.num_cells = j.value("num_cells", l.num_cells);
    l.cell_radius = j.value("cell_radius", l.cell_radius);
    l.ris_per_cell = j.value("ris_per_cell", l.ris_per_cell);
    l.elements_per_ris = j.value("elements_per_ris", l.elements_per_ris);
    l.ues_per_cell = j.value("ues_per_cell", l.ues_per_cell);
    l.ris_bs_distance = j.value("ris_bs_distance", l.ris_bs_distance);
    l.wraparound = j.value("wraparound", l.wraparound);
    l.min_distance = j.value("min_distance", l.min_distance);
    return l;
}

inline nlohmann::json pathloss_to_json(const PathLossParams& p) {
    return {{"alpha_cu", p.alpha_cu},
            {"alpha_ci", p.alpha_ci},
            {"alpha_iu", p.alpha_iu},
            {"tx_power_per_rb", p.tx_power_per_rb},
            {"noise_power", p.noise_power}};
}

inline PathLossParams pathloss_from_json(const nlohmann::json& j, PathLossParams p = {}) {
    detail::check_keys(j, {"alpha_cu", "alpha_ci", "alpha_iu", "tx_power_per_rb", "noise_power"}, "pathloss");
    p.alpha_cu = j.value("alpha_cu", p.alpha_cu);
    p.alpha_ci = j.value("alpha_ci", p.alpha_ci);
    p.alpha_iu = j.value("alpha_iu", p.alpha_iu);
    p.tx_power_per_rb = j.value("tx_power_per_rb", p.tx_power_per_rb);
    p.noise_power = j.value("noise_power", p.noise_power);
    return p;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    const ChannelSet& ch = s.channels();
    nlohmann::json j;
    j["format"] = "risload-scenario";
    j["version"] = kScenarioFormatVersion;
    j["seed"] = s.seed();
    j["layout"] = layout_to_json(s.layout());
    j["pathloss"] = pathloss_to_json(s.pathloss());
    j["num_cells"] = ch.num_cells;
    j["num_ris"] = ch.num_ris;
    j["elements"] = ch.elements;
    j["serving_cell"] = ch.serving_cell;
    j["ris_owner"] = ch.ris_owner;
    j["demand"] = ch.demand;
    j["tx_power"] = ch.tx_power;
    j["noise_power"] = ch.noise_power;
    j["positions"] = {{"bs", detail::points_to_json(s.bs_positions())},
                      {"ris", detail::points_to_json(s.ris_positions())},
                      {"ue", detail::points_to_json(s.ue_positions())}};
    j["direct"] = detail::complex_matrix_to_json(ch.direct);
    j["bs_ris"] = detail::complex_matrix_to_json(ch.bs_ris);
    j["ris_ue"] = detail::complex_matrix_to_json(ch.ris_ue);
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    try {
        detail::check_keys(j,
                           {"format", "version", "seed", "layout", "pathloss", "num_cells", "num_ris", "elements",
                            "serving_cell", "ris_owner", "demand", "tx_power", "noise_power", "positions", "direct",
                            "bs_ris", "ris_ue"},
                           "scenario file");
        if (j.at("format").get<std::string>() != "risload-scenario")
            throw ConfigError("scenario file: wrong format tag");
        if (j.at("version").get<int>() != kScenarioFormatVersion)
            throw ConfigError("scenario file: unsupported version " + j.at("version").dump());
        ChannelSet ch;
        ch.num_cells = j.at("num_cells").get<int>();
        ch.num_ris = j.at("num_ris").get<int>();
        ch.elements = j.at("elements").get<int>();
        ch.serving_cell = j.at("serving_cell").get<std::vector<int>>();
        ch.ris_owner = j.at("ris_owner").get<std::vector<int>>();
        ch.demand = j.at("demand").get<std::vector<double>>();
        ch.tx_power = j.at("tx_power").get<std::vector<double>>();
        ch.noise_power = j.at("noise_power").get<double>();
        const Eigen::Index I = ch.num_cells, L = ch.num_ris, M = ch.elements;
        const auto J = static_cast<Eigen::Index>(ch.serving_cell.size());
        ch.direct = detail::complex_matrix_from_json(j.at("direct"), I, J, "direct");
        ch.bs_ris = detail::complex_matrix_from_json(j.at("bs_ris"), I * L, L > 0 ? M : 0, "bs_ris");
        ch.ris_ue = detail::complex_matrix_from_json(j.at("ris_ue"), L * J, L > 0 ? M : 0, "ris_ue");
        const nlohmann::json& pos = j.at("positions");
        detail::check_keys(pos, {"bs", "ris", "ue"}, "scenario file positions");
        return Scenario(std::move(ch), layout_from_json(j.at("layout")), pathloss_from_json(j.at("pathloss")),
                        j.at("seed").get<std::uint64_t>(), detail::points_from_json(pos.at("bs")),
                        detail::points_from_json(pos.at("ris")), detail::points_from_json(pos.at("ue")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario file: ") + e.what());
    }
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << scenario_to_json(s).dump(1) << "\n";
    if (!os) throw ConfigError("write failed: " + path);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace risload
