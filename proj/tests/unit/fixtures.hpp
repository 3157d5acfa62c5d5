#pragma once

// Shared test configurations.
//
// The two reference scenarios place the relay midway between source and
// destination (d1 = d2 = 1, d3 = 2, d1p = 3) in the interference-limited
// regime at gamma_p = -5 dB with a single rate of 2 bits/slot, differing only
// in the relay's interference distance: d2p = 1.5 (relay close to the primary,
// weak second hop) versus d2p = 3 (symmetric interference distances). Golden
// values for these scenarios were derived with an independent formula
// evaluation and high-precision quadrature.

#include <cmath>
#include <limits>
#include <vector>

#include "bufrelay/channel.hpp"
#include "bufrelay/config.hpp"
#include "bufrelay/lattice.hpp"
#include "bufrelay/rng.hpp"

namespace fixtures {

inline constexpr double kGammaPdbMinus5 = 0.31622776601683794; // 10^(-5/10)

inline bufrelay::SystemGeometry geometry(double d2p) {
    return {1.0, 1.0, 2.0, 3.0, d2p, 3.0};
}

inline bufrelay::PowerConstraints pip_power() {
    return {std::numeric_limits<double>::infinity(), kGammaPdbMinus5};
}

inline bufrelay::LinkStats relay_close() {
    return bufrelay::derive_stats(geometry(1.5), pip_power());
}

inline bufrelay::LinkStats relay_far() {
    return bufrelay::derive_stats(geometry(3.0), pip_power());
}

inline bufrelay::RateSet single_rate2() {
    using bufrelay::Rational;
    std::vector<Rational> r{Rational(0), Rational(2)};
    return bufrelay::RateSet(r, r);
}

inline bufrelay::RateSet rates012() {
    using bufrelay::Rational;
    std::vector<Rational> r{Rational(0), Rational(1), Rational(2)};
    return bufrelay::RateSet(r, r);
}

/// Random scenario for property tests: geometry in a moderate box, either
/// power regime, and K + 1 uniformly spaced rates with a rational scale drawn
/// from a pool that includes non-integer values.
struct RandomScenario {
    bufrelay::LinkStats stats;
    bufrelay::RateSet rates;
};

inline RandomScenario random_scenario(bufrelay::Rng& rng, int max_levels = 4) {
    using bufrelay::Rational;
    auto dist = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    bufrelay::SystemGeometry g;
    g.d1 = dist(0.6, 2.5);
    g.d2 = dist(0.6, 2.5);
    g.d3 = dist(1.0, 3.5);
    g.d1p = dist(0.8, 4.0);
    g.d2p = dist(0.8, 4.0);
    g.alpha_pl = dist(2.0, 4.0);
    bufrelay::PowerConstraints pc;
    pc.gamma_p = std::pow(10.0, dist(-10.0, 10.0) / 10.0);
    pc.gamma_max = rng.uniform() < 0.5 ? std::numeric_limits<double>::infinity()
                                       : std::pow(10.0, dist(0.0, 20.0) / 10.0);
    static const Rational scales[] = {Rational(1, 2), Rational(1),    Rational(5, 4),
                                      Rational(3, 2), Rational(7, 4), Rational(2)};
    const int K = 1 + static_cast<int>(rng.uniform() * max_levels) % max_levels;
    const Rational S = scales[static_cast<std::size_t>(rng.uniform() * 6) % 6];
    std::vector<Rational> r;
    for (int k = 0; k <= K; ++k) r.push_back(Rational(k) * S);
    return {bufrelay::derive_stats(g, pc), bufrelay::RateSet(r, r)};
}

} // namespace fixtures
