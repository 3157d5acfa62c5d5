#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "bufrelay/analytic.hpp"
#include "bufrelay/channel.hpp"
#include "bufrelay/errors.hpp"
#include "bufrelay/lattice.hpp"
#include "bufrelay/rng.hpp"

namespace bufrelay {

/// Everything the per-slot policy needs: the weight the decision metrics are
/// evaluated at and the configured coin-toss probabilities. Three-way ties
/// reuse the pairwise probabilities (link 1 share p1_t2, link 2 share p2_t1,
/// remainder to link 3).
struct SimPolicy {
    Rational alpha;
    double p11 = 1.0;
    double p22 = 1.0;
    double p1_t2 = 0.5;
    double p2_t1 = 0.5;
    double p1_t3 = 0.5;
};

inline SimPolicy policy_of(const OperatingPoint& op) {
    return {op.alpha_run, op.p11, op.p22, op.p1_t2, op.p2_t1, op.p1_t3};
}

/// Policy pinned to an arbitrary lattice weight with neutral coin tosses;
/// used as a negative control to demonstrate what running off the balanced
/// weight does to the buffer.
inline SimPolicy forced_policy(const AlphaLattice& lattice, std::size_t w) {
    if (w >= lattice.values.size()) throw invalid_parameter("forced weight index out of range");
    return {lattice.values[w], 1.0, 1.0, 0.5, 0.5, 0.5};
}

struct FeasibleIndices {
    int k1 = 0, k2 = 0, k3 = 0;
};

namespace detail {
inline int max_feasible(const std::vector<double>& thr, double snr) {
    // thr ends with the +inf sentinel; the largest decodable index is K at most.
    int k = 0;
    const int K = static_cast<int>(thr.size()) - 2;
    while (k < K && snr >= thr[static_cast<std::size_t>(k + 1)]) ++k;
    return k;
}
} // namespace detail

/// Largest decodable rate index per link for one SNR draw. Under combined
/// signalling link 2 decodes from the sum g2 + g3, so its index never falls
/// below the direct path's.
inline FeasibleIndices feasible_indices(const SnrTriplet& snr, const SnrThresholds& thr,
                                        Scheme scheme) {
    FeasibleIndices f;
    f.k1 = detail::max_feasible(thr.g[0], snr.g1);
    f.k3 = detail::max_feasible(thr.g[2], snr.g3);
    const double link2_snr = scheme == Scheme::combined ? snr.g2 + snr.g3 : snr.g2;
    f.k2 = detail::max_feasible(thr.g[1], link2_snr);
    return f;
}

struct SlotDecision {
    Mode mode = Mode::none;
    int link = 0; // 0 = silent
    Rational rate;
    bool coin_toss_used = false;
};

/// Applies the link-selection rule to one slot: strict metric maximizer wins;
/// ties draw the configured coin toss; a throttled single-link mode may stay
/// silent even though the link is feasible.
inline SlotDecision select_link(const FeasibleIndices& f, const SimPolicy& pol,
                                const RateSet& rates, Rng& rng) {
    const RateTripletIndex t{f.k1, f.k2, f.k3};
    const auto metrics = decision_metrics(pol.alpha, t, rates);
    const Mode mode = classify_metrics(metrics);

    SlotDecision d;
    d.mode = mode;
    auto pick = [&](int link) {
        d.link = link;
        switch (link) {
        case 1: d.rate = rates.r1()[static_cast<std::size_t>(f.k1)]; break;
        case 2: d.rate = rates.r2()[static_cast<std::size_t>(f.k2)]; break;
        case 3: d.rate = rates.r3()[static_cast<std::size_t>(f.k3)]; break;
        default: d.rate = Rational(0); break;
        }
    };

    switch (mode) {
    case Mode::none:
        pick(0);
        break;
    case Mode::link1:
        if (pol.p11 >= 1.0) {
            pick(1);
        } else {
            d.coin_toss_used = true;
            pick(rng.uniform() < pol.p11 ? 1 : 0);
        }
        break;
    case Mode::link2:
        if (pol.p22 >= 1.0) {
            pick(2);
        } else {
            d.coin_toss_used = true;
            pick(rng.uniform() < pol.p22 ? 2 : 0);
        }
        break;
    case Mode::link3:
        pick(3);
        break;
    case Mode::tie_not1:
        d.coin_toss_used = true;
        pick(rng.uniform() < pol.p2_t1 ? 2 : 3);
        break;
    case Mode::tie_not2:
        d.coin_toss_used = true;
        pick(rng.uniform() < pol.p1_t2 ? 1 : 3);
        break;
    case Mode::tie_not3:
        d.coin_toss_used = true;
        pick(rng.uniform() < pol.p1_t3 ? 1 : 2);
        break;
    case Mode::tie_all: {
        d.coin_toss_used = true;
        const double u = rng.uniform();
        if (u < pol.p1_t2)
            pick(1);
        else if (u < pol.p1_t2 + pol.p2_t1)
            pick(2);
        else
            pick(3);
        break;
    }
    }
    return d;
}

struct SimConfig {
    long long slots = 1'000'000;
    std::uint64_t seed = 1;
    long long warmup = -1; // negative: default to 1% of slots
};

struct SimReport {
    double tau1_hat = 0, tau2_hat = 0, tau3_hat = 0, tau_t_hat = 0;
    std::array<double, 8> mode_freq{};
    double mean_occupancy = 0;
    double final_occupancy = 0;
    double occupancy_drift = 0; // least-squares slope, bits/slot, final half
    long long underflow_slots = 0;
    double shortfall_bits = 0; // bits the relay was scheduled for but did not hold
    long long slots = 0;
    long long warmup = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Slot-level simulation of the selection policy against a real relay buffer
/// with a saturated source. Link-1 slots add the admitted rate to the buffer;
/// link-2 slots drain and credit min(rate, occupancy), since the relay cannot
/// send bits it does not hold, and the shortfall is counted in the report.
/// Averages exclude the warmup prefix. Deterministic for a fixed seed.
inline SimReport run_simulation(const SimConfig& cfg, const LinkStats& stats, const RateSet& rates,
                                const SimPolicy& pol, Scheme scheme) {
    if (cfg.slots < 1) throw invalid_parameter("simulation needs at least one slot");
    if (scheme == Scheme::combined && !rates.symmetric())
        throw invalid_parameter("combined signalling requires identical source and relay rate sets");
    const long long warmup = cfg.warmup >= 0 ? cfg.warmup : cfg.slots / 100;
    if (warmup >= cfg.slots) throw invalid_parameter("warmup must leave slots to measure");

    const auto thr = thresholds(rates);
    Rng rng(cfg.seed);

    const long long measured = cfg.slots - warmup;
    const long long half_start = warmup + measured / 2;
    const long long nhalf = cfg.slots - half_start;
    const long double t_center = (static_cast<long double>(nhalf) - 1.0L) / 2.0L;

    double buffer = 0.0;
    detail::Accumulator in_bits, out_bits, direct_bits, occ_sum;
    std::array<long long, 8> mode_count{};
    long long underflow = 0;
    detail::Accumulator shortfall;
    long double drift_num = 0.0L;

    for (long long n = 0; n < cfg.slots; ++n) {
        const SnrTriplet snr = sample_snr_triplet(stats, rng);
        const FeasibleIndices fi = feasible_indices(snr, thr, scheme);
        const SlotDecision dec = select_link(fi, pol, rates, rng);
        const bool measure = n >= warmup;

        switch (dec.link) {
        case 1:
            buffer += dec.rate.to_double();
            if (measure) in_bits.add(dec.rate.to_double());
            break;
        case 2: {
            const double want = dec.rate.to_double();
            const double sent = std::min(want, buffer);
            buffer -= sent;
            if (sent < want) {
                ++underflow;
                shortfall.add(want - sent);
            }
            if (measure) out_bits.add(sent);
            break;
        }
        case 3:
            if (measure) direct_bits.add(dec.rate.to_double());
            break;
        default:
            break;
        }

        if (measure) {
            ++mode_count[mode_index(dec.mode)];
            occ_sum.add(buffer);
            if (n >= half_start)
                drift_num += static_cast<long double>(buffer) *
                             (static_cast<long double>(n - half_start) - t_center);
        }
    }

    SimReport rep;
    rep.slots = cfg.slots;
    rep.warmup = warmup;
    rep.seed = cfg.seed;
    const double inv_m = 1.0 / static_cast<double>(measured);
    rep.tau1_hat = in_bits.value() * inv_m;
    rep.tau2_hat = out_bits.value() * inv_m;
    rep.tau3_hat = direct_bits.value() * inv_m;
    rep.tau_t_hat = rep.tau2_hat + rep.tau3_hat;
    for (std::size_t m = 0; m < 8; ++m)
        rep.mode_freq[m] = static_cast<double>(mode_count[m]) * inv_m;
    rep.mean_occupancy = occ_sum.value() * inv_m;
    rep.final_occupancy = buffer;
    if (nhalf >= 2) {
        const long double nn = static_cast<long double>(nhalf);
        const long double denom = nn * (nn * nn - 1.0L) / 12.0L;
        rep.occupancy_drift = static_cast<double>(drift_num / denom);
    }
    rep.underflow_slots = underflow;
    rep.shortfall_bits = shortfall.value();
    return rep;
}

} // namespace bufrelay
