// SPDX-License-Identifier: Apache-2.0
#pragma once

// Hand-built instances shared by the test binaries.

#include <cstdint>
#include <random>

#include "risload/risload.hpp"

namespace risload::testing {

/// Zero channels with UEs and RISs assigned to cells in blocks.
inline ChannelSet blank_channels(int cells, int ues_per_cell, int ris_per_cell, int M, double demand = 1.0,
                                 double noise = 1.0) {
    ChannelSet ch;
    ch.num_cells = cells;
    ch.num_ris = cells * ris_per_cell;
    ch.elements = M;
    const int J = cells * ues_per_cell;
    for (int j = 0; j < J; ++j) ch.serving_cell.push_back(j / ues_per_cell);
    for (int l = 0; l < ch.num_ris; ++l) ch.ris_owner.push_back(l / ris_per_cell);
    ch.demand.assign(J, demand);
    ch.tx_power.assign(cells, 1.0);
    ch.noise_power = noise;
    ch.direct = Eigen::MatrixXcd::Zero(cells, J);
    ch.bs_ris = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(cells) * ch.num_ris, M);
    ch.ris_ue = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ch.num_ris) * J, M);
    return ch;
}

/// Unit-noise instance with O(1) gains: serving links ~ CN(0, 1), links from
/// other cells ~ cross * CN(0, 1), RIS hops ~ ris * CN(0, 1).
inline Scenario unit_scenario(std::uint64_t seed, int cells, int ues_per_cell, int ris_per_cell, int M,
                              double demand = 1.0, double cross = 0.3, double ris = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    auto cn = [&] { return cplx(g(rng), g(rng)); };
    ChannelSet ch = blank_channels(cells, ues_per_cell, ris_per_cell, M, demand);
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < ch.direct.cols(); ++j) ch.direct(i, j) = (ch.serving_cell[j] == i ? 1.0 : cross) * cn();
    for (Eigen::Index r = 0; r < ch.bs_ris.rows(); ++r)
        for (int m = 0; m < M; ++m) ch.bs_ris(r, m) = ris * cn();
    for (Eigen::Index r = 0; r < ch.ris_ue.rows(); ++r)
        for (int m = 0; m < M; ++m) ch.ris_ue(r, m) = ris * cn();
    return Scenario(std::move(ch));
}

/// Same as unit_scenario but every RIS reflects only towards UEs of its own
/// cell, so a cell's phases cannot touch any other cell's links.
inline Scenario isolated_ris_scenario(std::uint64_t seed, int cells, int ues_per_cell, int ris_per_cell, int M,
                                      double demand = 1.0, double cross = 0.3, double ris = 0.3) {
    ChannelSet ch = unit_scenario(seed, cells, ues_per_cell, ris_per_cell, M, demand, cross, ris).channels();
    const int J = static_cast<int>(ch.serving_cell.size());
    for (int l = 0; l < ch.num_ris; ++l)
        for (int j = 0; j < J; ++j)
            if (ch.serving_cell[j] != ch.ris_owner[l]) ch.ris_ue.row(static_cast<Eigen::Index>(l) * J + j).setZero();
    return Scenario(std::move(ch));
}

/// Adds `boost` to every serving direct link so no UE sits in a deep fade.
inline Scenario with_strong_serving(const Scenario& s, double boost = 1.5) {
    ChannelSet ch = s.channels();
    for (std::size_t j = 0; j < ch.serving_cell.size(); ++j) ch.direct(ch.serving_cell[j], j) += boost;
    return Scenario(std::move(ch));
}

/// Small default-geometry instance (physical path loss, SI units).
inline Scenario small_physical(std::uint64_t seed, int cells = 3, int ues_per_cell = 2, int ris_per_cell = 1,
                               int M = 4, double demand = 0.05) {
    Layout lay;
    lay.num_cells = cells;
    lay.ues_per_cell = ues_per_cell;
    lay.ris_per_cell = ris_per_cell;
    lay.elements_per_ris = M;
    lay.wraparound = cells == 7;
    DemandSpec d;
    d.uniform = demand;
    return generate_scenario(lay, PathLossParams{}, d, seed);
}

inline CellContext context_at_init(const Scenario& s, int cell, double load = 0.5) {
    return make_cell_context(s, PhaseConfig::initial(s), LoadVector::Constant(s.num_cells(), load), cell);
}

}  // namespace risload::testing
