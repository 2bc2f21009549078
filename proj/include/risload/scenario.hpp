// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "risload/error.hpp"

namespace risload {

using cplx = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline double euclidean(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Network geometry. Cells are hexagons of circumradius `cell_radius`,
/// centred on their base station and laid out on a hexagonal lattice.
struct Layout {
    int num_cells = 7;
    double cell_radius = 500.0;
    int ris_per_cell = 7;
    int elements_per_ris = 20;
    int ues_per_cell = 10;
    double ris_bs_distance = 250.0;
    bool wraparound = true;
    /// UE positions closer than this to a BS or RIS are resampled.
    double min_distance = 10.0;

    int elements_per_cell() const { return ris_per_cell * elements_per_ris; }

    void validate() const {
        if (num_cells < 1) throw ConfigError("layout: num_cells must be >= 1");
        if (ues_per_cell < 1) throw ConfigError("layout: ues_per_cell must be >= 1");
        if (elements_per_ris < 1) throw ConfigError("layout: elements_per_ris must be >= 1");
        if (ris_per_cell < 0) throw ConfigError("layout: ris_per_cell must be >= 0");
        if (!(cell_radius > 0.0)) throw ConfigError("layout: cell_radius must be > 0");
        if (!(ris_bs_distance < cell_radius) || ris_bs_distance < 0.0)
            throw ConfigError("layout: ris_bs_distance must lie in [0, cell_radius)");
        if (!(min_distance > 0.0)) throw ConfigError("layout: min_distance must be > 0");
        if (min_distance >= cell_radius * std::sqrt(3.0) / 2.0)
            throw ConfigError("layout: min_distance leaves no room for UEs inside a cell");
        if (ris_per_cell > 0 && ris_bs_distance < min_distance)
            throw ConfigError("layout: RIS closer to its BS than min_distance");
        if (wraparound && num_cells != 7)
            throw ConfigError("layout: wrap-around is defined for the 7-cell cluster only");
    }
};

/// Path-loss exponents act on power: |g|^2 ~ D^-alpha (amplitude D^-alpha/2).
struct PathLossParams {
    double alpha_cu = 3.5;
    double alpha_ci = 2.2;
    double alpha_iu = 2.2;
    double tx_power_per_rb = 1.0;
    double noise_power = noise_from_density(-174.0, 200e3);

    /// Thermal noise power in watts from a density in dBm/Hz over `bandwidth_hz`.
    static double noise_from_density(double dbm_per_hz, double bandwidth_hz) {
        return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0) * bandwidth_hz;
    }

    void validate() const {
        for (double a : {alpha_cu, alpha_ci, alpha_iu})
            if (!(a >= 1.5 && a <= 6.0)) throw ConfigError("pathloss: exponent outside [1.5, 6]");
        if (!(tx_power_per_rb > 0.0)) throw ConfigError("pathloss: tx_power_per_rb must be > 0");
        if (!(noise_power > 0.0)) throw ConfigError("pathloss: noise_power must be > 0");
    }
};

/// Value domain of the reflection coefficients.
struct Domain {
    enum class Kind { Ideal, UnitModulus, Discrete };
    Kind kind = Kind::Ideal;
    int levels = 0;  // N, only for Discrete

    static Domain ideal() { return {Kind::Ideal, 0}; }
    static Domain unit_modulus() { return {Kind::UnitModulus, 0}; }
    static Domain discrete(int n) {
        if (n < 2) throw std::invalid_argument("discrete domain needs N >= 2");
        return {Kind::Discrete, n};
    }
    double step() const { return 2.0 * std::numbers::pi / levels; }
    cplx level(int k) const { return std::polar(1.0, k * step()); }

    std::string label() const {
        switch (kind) {
            case Kind::Ideal: return "D1";
            case Kind::UnitModulus: return "D2";
            case Kind::Discrete: return "D3(" + std::to_string(levels) + ")";
        }
        return "?";
    }
    friend bool operator==(const Domain&, const Domain&) = default;
};

/// Either one demand for every UE or an explicit per-UE list (normalized
/// bits/s/Hz, so that a UE's load share is d / log2(1 + SINR)).
struct DemandSpec {
    double uniform = 0.6;
    std::vector<double> per_ue;

    double at(int ue) const { return per_ue.empty() ? uniform : per_ue.at(ue); }
};

/// Raw channel description. Used both by the generator and for hand-built
/// instances in tests. Indexing: cells i, UEs j, RISs l, elements m.
struct ChannelSet {
    int num_cells = 0;
    int num_ris = 0;
    int elements = 0;
    std::vector<int> serving_cell;  // per UE
    std::vector<int> ris_owner;     // per RIS
    std::vector<double> demand;     // per UE
    std::vector<double> tx_power;   // per cell
    double noise_power = 1.0;
    Eigen::MatrixXcd direct;  // cells x UEs, g_ij
    Eigen::MatrixXcd bs_ris;  // (i * L + l) x M, G_il
    Eigen::MatrixXcd ris_ue;  // (l * J + j) x M, H_lj stored as a row
};

/// Cascade coefficients Lambda = G diag(H): the element-wise product.
inline Eigen::RowVectorXcd cascade_row(const Eigen::Ref<const Eigen::RowVectorXcd>& bs_ris,
                                       const Eigen::Ref<const Eigen::VectorXcd>& ris_ue) {
    if (bs_ris.size() != ris_ue.size())
        throw std::invalid_argument("cascade_row: length mismatch");
    return bs_ris.cwiseProduct(ris_ue.transpose());
}

/// Immutable multi-cell network instance with precomputed cascade tensor.
class Scenario {
public:
    Scenario() = default;

    explicit Scenario(ChannelSet ch, Layout layout = {}, PathLossParams pl = {},
                      std::uint64_t seed = 0, std::vector<Point> bs_pos = {},
                      std::vector<Point> ris_pos = {}, std::vector<Point> ue_pos = {})
        : ch_(std::move(ch)), layout_(layout), pl_(pl), seed_(seed),
          bs_pos_(std::move(bs_pos)), ris_pos_(std::move(ris_pos)), ue_pos_(std::move(ue_pos)) {
        check_shapes();
        index();
        build_cascade();
    }

    int num_cells() const { return ch_.num_cells; }
    int num_ues() const { return static_cast<int>(ch_.serving_cell.size()); }
    int num_ris() const { return ch_.num_ris; }
    int elements() const { return ch_.elements; }
    int num_phase_elements() const { return ch_.num_ris * ch_.elements; }

    const Layout& layout() const { return layout_; }
    const PathLossParams& pathloss() const { return pl_; }
    std::uint64_t seed() const { return seed_; }
    const ChannelSet& channels() const { return ch_; }

    cplx direct_gain(int cell, int ue) const { return ch_.direct(cell, ue); }
    auto bs_ris_gain(int cell, int ris) const {
        return ch_.bs_ris.row(static_cast<Eigen::Index>(cell) * ch_.num_ris + ris);
    }
    auto ris_ue_gain(int ris, int ue) const {
        return ch_.ris_ue.row(static_cast<Eigen::Index>(ris) * num_ues() + ue).transpose();
    }
    /// Lambda_{ijl}, length M.
    Eigen::Map<const Eigen::RowVectorXcd> cascade(int cell, int ue, int ris) const {
        const std::size_t off =
            ((static_cast<std::size_t>(cell) * num_ues() + ue) * ch_.num_ris + ris) * ch_.elements;
        return {cascade_.data() + off, ch_.elements};
    }
    /// All cascade rows from `cell` to `ue`, concatenated over RISs (length L*M).
    Eigen::Map<const Eigen::RowVectorXcd> cascade_all(int cell, int ue) const {
        const std::size_t off =
            (static_cast<std::size_t>(cell) * num_ues() + ue) * ch_.num_ris * ch_.elements;
        return {cascade_.data() + off, ch_.num_ris * ch_.elements};
    }

    double demand(int ue) const { return ch_.demand[ue]; }
    int serving_cell(int ue) const { return ch_.serving_cell[ue]; }
    int ris_owner(int ris) const { return ch_.ris_owner[ris]; }
    double tx_power(int cell) const { return ch_.tx_power[cell]; }
    double noise_power() const { return ch_.noise_power; }

    std::span<const int> ues_of(int cell) const { return cell_ues_[cell]; }
    std::span<const int> ris_of(int cell) const { return cell_ris_[cell]; }
    int elements_of(int cell) const { return static_cast<int>(cell_ris_[cell].size()) * ch_.elements; }

    const std::vector<Point>& bs_positions() const { return bs_pos_; }
    const std::vector<Point>& ris_positions() const { return ris_pos_; }
    const std::vector<Point>& ue_positions() const { return ue_pos_; }

    /// Same geometry and channels with every demand replaced.
    Scenario with_demands(std::vector<double> demand) const {
        ChannelSet ch = ch_;
        ch.demand = std::move(demand);
        return Scenario(std::move(ch), layout_, pl_, seed_, bs_pos_, ris_pos_, ue_pos_);
    }
    Scenario with_uniform_demand(double d) const {
        return with_demands(std::vector<double>(num_ues(), d));
    }

private:
    void check_shapes() const {
        const int I = ch_.num_cells, J = static_cast<int>(ch_.serving_cell.size());
        const int L = ch_.num_ris, M = ch_.elements;
        if (I < 1) throw ConfigError("scenario: need at least one cell");
        if (L > 0 && M < 1) throw ConfigError("scenario: RIS present but no elements");
        if (static_cast<int>(ch_.ris_owner.size()) != L) throw ConfigError("scenario: ris_owner size");
        if (static_cast<int>(ch_.demand.size()) != J) throw ConfigError("scenario: demand size");
        if (static_cast<int>(ch_.tx_power.size()) != I) throw ConfigError("scenario: tx_power size");
        if (ch_.direct.rows() != I || ch_.direct.cols() != J) throw ConfigError("scenario: direct shape");
        if (ch_.bs_ris.rows() != I * L || (L > 0 && ch_.bs_ris.cols() != M))
            throw ConfigError("scenario: bs_ris shape");
        if (ch_.ris_ue.rows() != L * J || (L > 0 && ch_.ris_ue.cols() != M))
            throw ConfigError("scenario: ris_ue shape");
        for (int c : ch_.serving_cell)
            if (c < 0 || c >= I) throw ConfigError("scenario: serving cell out of range");
        for (int c : ch_.ris_owner)
            if (c < 0 || c >= I) throw ConfigError("scenario: RIS owner out of range");
        for (double d : ch_.demand)
            if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("scenario: demand must be finite and >= 0");
        for (double p : ch_.tx_power)
            if (!(p > 0.0)) throw ConfigError("scenario: tx power must be > 0");
        if (!(ch_.noise_power > 0.0)) throw ConfigError("scenario: noise power must be > 0");
    }

    void index() {
        cell_ues_.assign(ch_.num_cells, {});
        cell_ris_.assign(ch_.num_cells, {});
        for (int j = 0; j < num_ues(); ++j) cell_ues_[ch_.serving_cell[j]].push_back(j);
        for (int l = 0; l < ch_.num_ris; ++l) cell_ris_[ch_.ris_owner[l]].push_back(l);
    }

    void build_cascade() {
        const int I = ch_.num_cells, J = num_ues(), L = ch_.num_ris, M = ch_.elements;
        cascade_.assign(static_cast<std::size_t>(I) * J * L * M, cplx{});
        std::size_t off = 0;
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < J; ++j)
                for (int l = 0; l < L; ++l)
                    for (int m = 0; m < M; ++m)
                        cascade_[off++] = ch_.bs_ris(i * L + l, m) * ch_.ris_ue(l * J + j, m);
    }

    ChannelSet ch_;
    Layout layout_;
    PathLossParams pl_;
    std::uint64_t seed_ = 0;
    std::vector<Point> bs_pos_, ris_pos_, ue_pos_;
    std::vector<std::vector<int>> cell_ues_, cell_ris_;
    std::vector<cplx> cascade_;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

namespace detail {

/// Lattice basis: neighbours sit at 30 deg and 90 deg from the origin.
inline std::pair<Point, Point> hex_basis(double cell_radius) {
    const double isd = std::sqrt(3.0) * cell_radius;
    const double a = std::numbers::pi / 6.0;
    return {{isd * std::cos(a), isd * std::sin(a)}, {0.0, isd}};
}

inline bool inside_hexagon(Point p, double radius) {
    const double s3 = std::sqrt(3.0);
    return std::abs(p.y) <= radius * s3 / 2.0 && s3 * std::abs(p.x) + std::abs(p.y) <= s3 * radius;
}

}  // namespace detail

/// Cell centres: origin, then rings of the hexagonal lattice ordered by angle.
inline std::vector<Point> cell_centers(const Layout& layout) {
    const auto [u, v] = detail::hex_basis(layout.cell_radius);
    struct Cand {
        int ring;
        double angle;
        Point p;
    };
    std::vector<Cand> cands;
    const int span = 1 + static_cast<int>(std::ceil(std::sqrt(static_cast<double>(layout.num_cells))));
    for (int a = -span; a <= span; ++a)
        for (int b = -span; b <= span; ++b) {
            const int ring = (std::abs(a) + std::abs(b) + std::abs(a + b)) / 2;
            Point p{a * u.x + b * v.x, a * u.y + b * v.y};
            double ang = std::atan2(p.y, p.x) - std::numbers::pi / 6.0;
            while (ang < -1e-9) ang += 2.0 * std::numbers::pi;
            cands.push_back({ring, ring == 0 ? 0.0 : ang, p});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.ring != y.ring) return x.ring < y.ring;
        return x.angle < y.angle;
    });
    std::vector<Point> out;
    for (int c = 0; c < layout.num_cells; ++c) out.push_back(cands[c].p);
    return out;
}

/// The six translations of the 7-cell cluster that tile the plane.
inline std::vector<Point> wraparound_offsets(const Layout& layout) {
    const auto [u, v] = detail::hex_basis(layout.cell_radius);
    const Point t1{2 * u.x + v.x, 2 * u.y + v.y};
    const Point t2{3 * v.x - u.x, 3 * v.y - u.y};
    const Point t3{t2.x - t1.x, t2.y - t1.y};
    return {t1, t2, t3, {-t1.x, -t1.y}, {-t2.x, -t2.y}, {-t3.x, -t3.y}};
}

/// Shortest distance from `a` to any wrap-around image of `b`; plain
/// Euclidean distance when wrap-around is off.
inline double wraparound_distance(Point a, Point b, const Layout& layout) {
    double best = euclidean(a, b);
    if (!layout.wraparound) return best;
    for (const Point& o : wraparound_offsets(layout))
        best = std::min(best, euclidean(a, Point{b.x + o.x, b.y + o.y}));
    return best;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Builds a reproducible instance: UEs uniform in their hexagon, RISs on a
/// ring around each BS, every link D^(-alpha/2) times a CN(0, 1) draw.
inline Scenario generate_scenario(const Layout& layout, const PathLossParams& pl,
                                  const DemandSpec& demand, std::uint64_t seed) {
    layout.validate();
    pl.validate();
    const int I = layout.num_cells;
    const int J = I * layout.ues_per_cell;
    const int L = I * layout.ris_per_cell;
    const int M = layout.elements_per_ris;
    if (!demand.per_ue.empty() && static_cast<int>(demand.per_ue.size()) != J)
        throw ConfigError("demand: per-UE list has wrong length");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    auto cn = [&] { return cplx(gauss(rng), gauss(rng)); };

    const std::vector<Point> bs = cell_centers(layout);
    std::vector<Point> ris;
    std::vector<int> ris_owner;
    for (int i = 0; i < I; ++i)
        for (int l = 0; l < layout.ris_per_cell; ++l) {
            const double a = 2.0 * std::numbers::pi * l / layout.ris_per_cell;
            ris.push_back({bs[i].x + layout.ris_bs_distance * std::cos(a),
                           bs[i].y + layout.ris_bs_distance * std::sin(a)});
            ris_owner.push_back(i);
        }

    std::vector<Point> ues;
    std::vector<int> serving;
    const double R = layout.cell_radius;
    for (int i = 0; i < I; ++i)
        for (int u = 0; u < layout.ues_per_cell; ++u) {
            bool placed = false;
            for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
                const Point off{R * unif(rng), R * std::sqrt(3.0) / 2.0 * unif(rng)};
                if (!detail::inside_hexagon(off, R)) continue;
                const Point p{bs[i].x + off.x, bs[i].y + off.y};
                bool ok = true;
                for (int k = 0; k < I && ok; ++k)
                    ok = wraparound_distance(p, bs[k], layout) >= layout.min_distance;
                for (std::size_t l = 0; l < ris.size() && ok; ++l)
                    ok = wraparound_distance(p, ris[l], layout) >= layout.min_distance;
                if (ok) {
                    ues.push_back(p);
                    serving.push_back(i);
                    placed = true;
                }
            }
            if (!placed) throw ConfigError("layout: could not place a UE away from BS/RIS sites");
        }

    ChannelSet ch;
    ch.num_cells = I;
    ch.num_ris = L;
    ch.elements = M;
    ch.serving_cell = serving;
    ch.ris_owner = ris_owner;
    ch.tx_power.assign(I, pl.tx_power_per_rb);
    ch.noise_power = pl.noise_power;
    ch.demand.resize(J);
    for (int j = 0; j < J; ++j) ch.demand[j] = demand.at(j);

    auto amp = [&](Point a, Point b, double alpha) {
        const double d = std::max(wraparound_distance(a, b, layout), layout.min_distance);
        return std::pow(d, -alpha / 2.0);
    };
    ch.direct.resize(I, J);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j) ch.direct(i, j) = amp(bs[i], ues[j], pl.alpha_cu) * cn();
    ch.bs_ris.resize(static_cast<Eigen::Index>(I) * L, M);
    for (int i = 0; i < I; ++i)
        for (int l = 0; l < L; ++l) {
            const double a = amp(bs[i], ris[l], pl.alpha_ci);
            for (int m = 0; m < M; ++m) ch.bs_ris(i * L + l, m) = a * cn();
        }
    ch.ris_ue.resize(static_cast<Eigen::Index>(L) * J, M);
    for (int l = 0; l < L; ++l)
        for (int j = 0; j < J; ++j) {
            const double a = amp(ris[l], ues[j], pl.alpha_iu);
            for (int m = 0; m < M; ++m) ch.ris_ue(l * J + j, m) = a * cn();
        }

    return Scenario(std::move(ch), layout, pl, seed, bs, ris, ues);
}

}  // namespace risload
