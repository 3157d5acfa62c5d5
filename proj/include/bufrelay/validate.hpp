#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bufrelay/analytic.hpp"
#include "bufrelay/channel.hpp"
#include "bufrelay/lattice.hpp"
#include "bufrelay/quadrature.hpp"
#include "bufrelay/rng.hpp"
#include "bufrelay/sim.hpp"

// Independent numerical oracles. Everything here reaches results by a route
// the closed forms do not share (raw-frequency Monte Carlo, direct per-draw
// classification, an alternative sampling construction), so the test suite
// can check each closed form against at least one of them.
namespace bufrelay::validate {

struct McEstimate {
    double estimate = 0;
    double std_error = 0;
};

/// Frequency estimate of Pr{g1 >= y1, X >= y2, g3 >= y3} with X = g2 under
/// relay_only and X = g2 + g3 under combined, plus its binomial standard
/// error.
inline McEstimate mc_joint_ccdf(const LinkStats& stats, double y1, double y2, double y3,
                                Scheme combiner, long long n, std::uint64_t seed) {
    Rng rng(seed);
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
        const SnrTriplet s = sample_snr_triplet(stats, rng);
        const double x = combiner == Scheme::combined ? s.g2 + s.g3 : s.g2;
        if (s.g1 >= y1 && x >= y2 && s.g3 >= y3) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

/// Mode frequencies obtained by classifying each raw SNR draw directly,
/// a path through the code that never touches the inclusion-exclusion sums.
inline std::array<double, 8> brute_force_mode_probs(const LinkStats& stats, const RateSet& rates,
                                                    const Rational& alpha, Scheme scheme,
                                                    long long n, std::uint64_t seed) {
    const auto thr = thresholds(rates);
    Rng rng(seed);
    std::array<long long, 8> count{};
    for (long long i = 0; i < n; ++i) {
        const SnrTriplet s = sample_snr_triplet(stats, rng);
        const FeasibleIndices f = feasible_indices(s, thr, scheme);
        ++count[mode_index(classify_mode(alpha, {f.k1, f.k2, f.k3}, rates))];
    }
    std::array<double, 8> freq{};
    for (std::size_t m = 0; m < 8; ++m)
        freq[m] = static_cast<double>(count[m]) / static_cast<double>(n);
    return freq;
}

/// Draws a triplet through the inverse-transmit-SNR construction
/// G = max(1/gamma_max, |g|^2/gamma_p), SNR = |h|^2 / G. Distributionally
/// identical to sample_snr_triplet; used to cross-check the sampler.
inline SnrTriplet sample_snr_inverse(const LinkStats& s, Rng& rng) {
    const double h1 = rng.exponential(s.omega_h[0]);
    const double h2 = rng.exponential(s.omega_h[1]);
    const double h3 = rng.exponential(s.omega_h[2]);
    const double g_src = rng.exponential(s.omega_g[0]);
    const double g_rly = rng.exponential(s.omega_g[1]);
    const double inv_src = std::max(1.0 / s.power.gamma_max, g_src / s.power.gamma_p);
    const double inv_rly = std::max(1.0 / s.power.gamma_max, g_rly / s.power.gamma_p);
    return {h1 / inv_src, h2 / inv_rly, h3 / inv_src};
}

/// Joint CCDF estimates of (g1, X, g3) on a full y1 x y2 x y3 grid from a
/// single pass of n draws. Each coordinate is bucketed against the sorted
/// grid, then suffix sums turn bucket counts into tail counts; this keeps a
/// 10^7-draw sweep over a 5x5x5 grid cheap.
struct GridCcdf {
    std::vector<double> grid; // sorted, ascending
    std::vector<double> est;  // size grid^3, index (i1*G + i2)*G + i3
    std::vector<double> se;
    long long draws = 0;

    double at(std::size_t i1, std::size_t i2, std::size_t i3) const {
        const std::size_t G = grid.size();
        return est[(i1 * G + i2) * G + i3];
    }
    double se_at(std::size_t i1, std::size_t i2, std::size_t i3) const {
        const std::size_t G = grid.size();
        return se[(i1 * G + i2) * G + i3];
    }
};

inline GridCcdf mc_joint_ccdf_grid(const LinkStats& stats, std::vector<double> grid,
                                   Scheme combiner, long long n, std::uint64_t seed) {
    const std::size_t G = grid.size();
    const std::size_t B = G + 1; // bucket b = number of grid values <= x
    std::vector<long long> count(B * B * B, 0);
    auto bucket = [&](double x) {
        std::size_t b = 0;
        while (b < G && x >= grid[b]) ++b;
        return b;
    };
    Rng rng(seed);
    for (long long i = 0; i < n; ++i) {
        const SnrTriplet s = sample_snr_triplet(stats, rng);
        const double x = combiner == Scheme::combined ? s.g2 + s.g3 : s.g2;
        ++count[(bucket(s.g1) * B + bucket(x)) * B + bucket(s.g3)];
    }
    // Suffix-sum along each axis: cell (b1,b2,b3) becomes the count of draws
    // with bucket >= b along every coordinate.
    auto idx = [B](std::size_t a, std::size_t b, std::size_t c) { return (a * B + b) * B + c; };
    for (std::size_t a = 0; a < B; ++a)
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = B - 1; c-- > 0;) count[idx(a, b, c)] += count[idx(a, b, c + 1)];
    for (std::size_t a = 0; a < B; ++a)
        for (std::size_t c = 0; c < B; ++c)
            for (std::size_t b = B - 1; b-- > 0;) count[idx(a, b, c)] += count[idx(a, b + 1, c)];
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < B; ++c)
            for (std::size_t a = B - 1; a-- > 0;) count[idx(a, b, c)] += count[idx(a + 1, b, c)];

    GridCcdf out;
    out.grid = std::move(grid);
    out.draws = n;
    out.est.resize(G * G * G);
    out.se.resize(G * G * G);
    for (std::size_t i1 = 0; i1 < G; ++i1)
        for (std::size_t i2 = 0; i2 < G; ++i2)
            for (std::size_t i3 = 0; i3 < G; ++i3) {
                // x >= grid[i] holds iff at least i+1 grid values are <= x.
                const double p = static_cast<double>(count[idx(i1 + 1, i2 + 1, i3 + 1)]) /
                                 static_cast<double>(n);
                out.est[(i1 * G + i2) * G + i3] = p;
                out.se[(i1 * G + i2) * G + i3] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            }
    return out;
}

/// Agreement report between an optional closed-form path and the quadrature
/// path on an argument grid.
struct GridConformance {
    bool conforming = false;
    double max_abs_err = 0;
    std::array<double, 3> worst_args{};
};

template <class F>
GridConformance grid_conformance(const LinkStats& stats, const std::vector<double>& grid,
                                 F&& candidate, double tol = 1e-6) {
    GridConformance c;
    for (double y1 : grid)
        for (double y2 : grid)
            for (double y3 : grid) {
                const double ref = joint_ccdf_scheme2(stats, y1, y2, y3);
                const double err = std::fabs(candidate(stats, y1, y2, y3) - ref);
                if (err > c.max_abs_err) {
                    c.max_abs_err = err;
                    c.worst_args = {y1, y2, y3};
                }
            }
    c.conforming = c.max_abs_err <= tol;
    return c;
}

inline GridConformance scheme2_pip_conformance(const LinkStats& stats,
                                               const std::vector<double>& grid,
                                               double tol = 1e-6) {
    return grid_conformance(
        stats, grid,
        [](const LinkStats& s, double y1, double y2, double y3) {
            return joint_ccdf_scheme2_pip(s, y1, y2, y3);
        },
        tol);
}

inline GridConformance scheme2_threeterm_conformance(const LinkStats& stats,
                                                     const std::vector<double>& grid,
                                                     double tol = 1e-6) {
    return grid_conformance(
        stats, grid,
        [](const LinkStats& s, double y1, double y2, double y3) {
            return joint_ccdf_scheme2_threeterm(s, y1, y2, y3);
        },
        tol);
}

} // namespace bufrelay::validate
