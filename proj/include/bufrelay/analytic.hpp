#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "bufrelay/channel.hpp"
#include "bufrelay/errors.hpp"
#include "bufrelay/lattice.hpp"

namespace bufrelay {

namespace detail {

/// Neumaier compensated accumulator; keeps mode sums accurate enough for the
/// 1e-9 identity tolerances even over large constellations.
struct Accumulator {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace detail

/// Probability that the triplet (k1, k2, k3) is exactly the maximal feasible
/// rate index on each link, by inclusion-exclusion over the joint CCDF at the
/// surrounding threshold corners. A corner at index K+1 hits the +inf
/// sentinel, where every CCDF is zero.
///
/// Under combined signalling only k2 >= k3 is possible; for k2 == k3 the sum
/// constraint is implied by the g3 constraint, so the lower corner drops to
/// zero and the inner index set becomes {-k2, 1}.
inline double joint_prob(const LinkStats& stats, const RateSet& rates, const SnrThresholds& thr,
                         const RateTripletIndex& t, Scheme scheme, double quad_tol = 1e-9) {
    if (t.k1 < 0 || t.k1 > rates.K1() || t.k2 < 0 || t.k2 > rates.K2() || t.k3 < 0 ||
        t.k3 > rates.K3())
        throw invalid_parameter("rate triplet index out of bounds");
    if (scheme == Scheme::relay_only) {
        double acc = 0.0;
        for (int j1 = 0; j1 <= 1; ++j1)
            for (int j2 = 0; j2 <= 1; ++j2)
                for (int j3 = 0; j3 <= 1; ++j3) {
                    const double y1 = thr.at(1, t.k1 + j1);
                    const double y2 = thr.at(2, t.k2 + j2);
                    const double y3 = thr.at(3, t.k3 + j3);
                    const double sign = ((j1 + j2 + j3) & 1) ? -1.0 : 1.0;
                    acc += sign * joint_ccdf_scheme1(stats, y1, y2, y3);
                }
        return acc;
    }

    if (!rates.symmetric())
        throw invalid_parameter("combined signalling requires identical source and relay rate sets");
    if (t.k2 < t.k3) return 0.0;
    std::array<int, 2> j2set = (t.k2 == t.k3) ? std::array<int, 2>{-t.k2, 1}
                                              : std::array<int, 2>{0, 1};
    double acc = 0.0;
    for (int j1 = 0; j1 <= 1; ++j1)
        for (int j2 : j2set)
            for (int j3 = 0; j3 <= 1; ++j3) {
                const double y1 = thr.at(1, t.k1 + j1);
                const double y2 = thr.at(2, t.k2 + j2);
                const double y3 = thr.at(3, t.k3 + j3);
                const double sign = ((j1 + std::max(j2, 0) + j3) & 1) ? -1.0 : 1.0;
                acc += sign * joint_ccdf_scheme2(stats, y1, y2, y3, quad_tol);
            }
    return acc;
}

inline double joint_prob(const LinkStats& stats, const RateSet& rates, const RateTripletIndex& t,
                         Scheme scheme, double quad_tol = 1e-9) {
    return joint_prob(stats, rates, thresholds(rates), t, scheme, quad_tol);
}

/// Per-weight mode probabilities and per-link expected rates over each mode's
/// domain set, for every weight in the lattice.
class ModeRateTable {
public:
    struct Row {
        Rational alpha;
        std::array<double, 8> prob{};
        // rate[link][mode]: expected bits/slot contributed by `mode` slots on
        // 1-based link `link+1`.
        std::array<std::array<double, 8>, 3> rate{};
    };

    ModeRateTable(AlphaLattice lattice, Scheme scheme, std::vector<Row> rows)
        : lattice_(std::move(lattice)), scheme_(scheme), rows_(std::move(rows)) {}

    const AlphaLattice& lattice() const { return lattice_; }
    Scheme scheme() const { return scheme_; }
    std::size_t W() const { return lattice_.W(); }
    const Row& row(std::size_t w) const { return rows_[w]; }

    double prob(std::size_t w, Mode m) const { return rows_[w].prob[mode_index(m)]; }

    /// Expected rate of `link` (1..3) summed over a union of modes.
    double link_rate(std::size_t w, int link, std::initializer_list<Mode> modes) const {
        double out = 0.0;
        for (Mode m : modes) out += rows_[w].rate[static_cast<std::size_t>(link - 1)][mode_index(m)];
        return out;
    }

private:
    AlphaLattice lattice_;
    Scheme scheme_;
    std::vector<Row> rows_;
};

inline ModeRateTable mode_table(const LinkStats& stats, const RateSet& rates,
                                const AlphaLattice& lattice, Scheme scheme,
                                double quad_tol = 1e-9) {
    const auto thr = thresholds(rates);

    // Triplet probabilities are weight-independent; compute them once.
    struct Entry {
        RateTripletIndex t;
        double p;
        std::array<double, 3> rate;
    };
    std::vector<Entry> entries;
    for (int k1 = 0; k1 <= rates.K1(); ++k1)
        for (int k2 = 0; k2 <= rates.K2(); ++k2)
            for (int k3 = 0; k3 <= rates.K3(); ++k3) {
                if (scheme == Scheme::combined && k2 < k3) continue;
                RateTripletIndex t{k1, k2, k3};
                entries.push_back({t,
                                   joint_prob(stats, rates, thr, t, scheme, quad_tol),
                                   {rates.r1()[static_cast<std::size_t>(k1)].to_double(),
                                    rates.r2()[static_cast<std::size_t>(k2)].to_double(),
                                    rates.r3()[static_cast<std::size_t>(k3)].to_double()}});
            }

    std::vector<ModeRateTable::Row> rows;
    rows.reserve(lattice.values.size());
    for (const auto& alpha : lattice.values) {
        std::array<detail::Accumulator, 8> prob;
        std::array<std::array<detail::Accumulator, 8>, 3> rate;
        for (const auto& e : entries) {
            const auto m = mode_index(classify_mode(alpha, e.t, rates));
            prob[m].add(e.p);
            for (int link = 0; link < 3; ++link)
                rate[static_cast<std::size_t>(link)][m].add(e.p * e.rate[static_cast<std::size_t>(link)]);
        }
        ModeRateTable::Row row;
        row.alpha = alpha;
        for (std::size_t m = 0; m < 8; ++m) {
            row.prob[m] = prob[m].value();
            for (std::size_t link = 0; link < 3; ++link) row.rate[link][m] = rate[link][m].value();
        }
        rows.push_back(std::move(row));
    }
    return ModeRateTable(lattice, scheme, std::move(rows));
}

enum class StabilityKind { case1, case2, case3a, case3b, case3c };

inline constexpr const char* stability_name(StabilityKind k) {
    constexpr const char* names[5] = {"case1", "case2", "case3a", "case3b", "case3c"};
    return names[static_cast<int>(k)];
}

struct StabilityCase {
    StabilityKind kind;
    std::size_t w_star;
};

/// The weighted system throughput at lattice index w. The forward form is
/// defined for w < W, the backward form for w > 0; where both exist they must
/// agree (the tie-mode rate identities make them algebraically equal), and a
/// disagreement is reported as an internal inconsistency.
inline double throughput_at(const ModeRateTable& tbl, std::size_t w, double tol = 1e-9) {
    const std::size_t W = tbl.W();
    const double a = tbl.row(w).alpha.to_double();
    double fwd = 0.0, bwd = 0.0;
    const bool has_fwd = w < W, has_bwd = w > 0;
    if (has_fwd)
        fwd = a * tbl.link_rate(w, 1, {Mode::link1, Mode::tie_not2, Mode::tie_not3, Mode::tie_all}) +
              (1.0 - a) * tbl.link_rate(w, 2, {Mode::link2}) +
              tbl.link_rate(w, 3, {Mode::link3, Mode::tie_not1});
    if (has_bwd)
        bwd = a * tbl.link_rate(w, 1, {Mode::link1}) +
              (1.0 - a) * tbl.link_rate(w, 2, {Mode::link2, Mode::tie_not1, Mode::tie_not3, Mode::tie_all}) +
              tbl.link_rate(w, 3, {Mode::link3, Mode::tie_not2});
    if (has_fwd && has_bwd && std::fabs(fwd - bwd) > tol)
        throw internal_error("throughput forms disagree at w=" + std::to_string(w) + ": " +
                             std::to_string(fwd) + " vs " + std::to_string(bwd));
    return has_fwd ? fwd : bwd;
}

struct ThroughputOptimum {
    double tau_t;
    std::size_t w_min;
    Rational alpha;
};

/// Minimum of the weighted throughput over the lattice, which is where the
/// buffer can be balanced; ties resolve to the smallest index.
inline ThroughputOptimum system_throughput(const ModeRateTable& tbl) {
    double best = 0.0;
    std::size_t best_w = 0;
    for (std::size_t w = 0; w <= tbl.W(); ++w) {
        const double v = throughput_at(tbl, w);
        if (w == 0 || v < best) {
            best = v;
            best_w = w;
        }
    }
    return {best, best_w, tbl.row(best_w).alpha};
}

/// Buffer-stability classification.
///
/// case1: the relay-out link is so weak that inflow must be throttled at the
///        first interior weight; case2 the mirror for the source-relay link;
/// case3: a unique interior balance index z exists, refined into 3a/3b/3c by
///        which side needs tie mass to balance.
inline StabilityCase classify_stability(const ModeRateTable& tbl) {
    const std::size_t W = tbl.W();
    auto R11 = [&](std::size_t w) { return tbl.link_rate(w, 1, {Mode::link1}); };
    auto R22 = [&](std::size_t w) { return tbl.link_rate(w, 2, {Mode::link2}); };

    if (R22(0) < R11(1)) return {StabilityKind::case1, 0};
    if (R11(W) < R22(W - 1)) return {StabilityKind::case2, W - 1};

    std::vector<std::size_t> zs;
    for (std::size_t z = 1; z + 1 <= W; ++z)
        if (R22(z - 1) >= R11(z) && R11(z + 1) >= R22(z)) zs.push_back(z);
    if (zs.empty()) {
        // Exact boundary tie R22(a0) == R11(a1) degenerates to case1 with a
        // unit link-1 probability.
        if (R22(0) == R11(1)) return {StabilityKind::case1, 0};
        throw internal_error("no stability case matched; upstream numerical bug");
    }
    if (zs.size() > 1) {
        // Multiple candidates only at exact degenerate ties; they must then
        // carry the same throughput.
        for (std::size_t i = 1; i < zs.size(); ++i)
            if (std::fabs(throughput_at(tbl, zs[i]) - throughput_at(tbl, zs[0])) > 1e-9)
                throw internal_error("balance index is not unique");
    }
    const std::size_t z = zs.front();

    const double r11 = R11(z);
    const double r22 = R22(z);
    const double r2_2t3 = tbl.link_rate(z, 2, {Mode::link2, Mode::tie_not3});
    const double r1_1t3 = tbl.link_rate(z, 1, {Mode::link1, Mode::tie_not3});
    if (r11 >= r2_2t3) return {StabilityKind::case3a, z};
    if (r22 >= r1_1t3) return {StabilityKind::case3c, z};
    return {StabilityKind::case3b, z};
}

/// Solved operating point: the weight the policy runs at, the tie-break
/// probabilities that balance the buffer, and the resulting buffered, direct
/// and total throughput.
struct OperatingPoint {
    Rational alpha_star;  // stability boundary weight (Lemma-style w*)
    Rational alpha_run;   // weight the slot policy evaluates metrics at
    StabilityCase stability{StabilityKind::case1, 0};
    std::size_t w_run = 0;
    double p11 = 1.0;   // transmit probability in single-feasible link-1 slots
    double p22 = 1.0;   // transmit probability in single-feasible link-2 slots
    double p1_t2 = 0.0; // link 1 wins a {1,3} tie (also the three-way link-1 share)
    double p2_t1 = 0.0; // link 2 wins a {2,3} tie (also the three-way link-2 share)
    double p1_t3 = 0.0; // link 1 wins a {1,2} tie
    double p2_t3 = 0.0;
    double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0, tau_t = 0.0;
};

namespace detail {

inline double checked_probability(double v, const char* what) {
    if (v < -1e-9 || v > 1.0 + 1e-9)
        throw internal_error(std::string("solved probability out of range for ") + what + ": " +
                             std::to_string(v));
    return std::clamp(v, 0.0, 1.0);
}

// Ratio num/den where an empty domain set makes den zero; then num must
// vanish too and the probability is immaterial.
inline double tie_ratio(double num, double den, const char* what) {
    if (den <= 1e-300) {
        if (std::fabs(num) > 1e-9)
            throw internal_error(std::string("empty tie set with nonzero balance demand in ") + what);
        return 0.0;
    }
    return checked_probability(num / den, what);
}

} // namespace detail

inline OperatingPoint solve_operating_point(const ModeRateTable& tbl, const StabilityCase& sc) {
    const std::size_t W = tbl.W();
    auto R = [&](std::size_t w, int link, std::initializer_list<Mode> ms) {
        return tbl.link_rate(w, link, ms);
    };

    OperatingPoint op;
    op.stability = sc;
    op.alpha_star = tbl.row(sc.w_star).alpha;

    switch (sc.kind) {
    case StabilityKind::case1: {
        // Run at the first interior weight, throttle link-1 inflow down to
        // the outflow the weak relay link can carry; all tie mass to link 2.
        op.w_run = 1;
        const double r22_0 = R(0, 2, {Mode::link2});
        const double r11_1 = R(1, 1, {Mode::link1});
        op.p11 = detail::tie_ratio(r22_0, r11_1, "case1 p11");
        op.p22 = 1.0;
        op.p1_t2 = 0.0;
        op.p2_t1 = 1.0;
        op.p1_t3 = 0.0;
        op.tau1 = op.tau2 = r22_0;
        op.tau3 = R(0, 3, {Mode::link3, Mode::tie_not1});
        break;
    }
    case StabilityKind::case2: {
        op.w_run = W - 1;
        const double r11_W = R(W, 1, {Mode::link1});
        const double r22_W1 = R(W - 1, 2, {Mode::link2});
        op.p22 = detail::tie_ratio(r11_W, r22_W1, "case2 p22");
        op.p11 = 1.0;
        op.p1_t2 = 1.0;
        op.p2_t1 = 0.0;
        op.p1_t3 = 1.0;
        op.tau1 = op.tau2 = r11_W;
        op.tau3 = R(W - 1, 3, {Mode::link3, Mode::tie_not1});
        break;
    }
    case StabilityKind::case3a: {
        const std::size_t z = sc.w_star;
        op.w_run = z;
        const double a = tbl.row(z).alpha.to_double();
        const double r11 = R(z, 1, {Mode::link1});
        const double r2_2t3 = R(z, 2, {Mode::link2, Mode::tie_not3});
        const double den = R(z, 2, {Mode::tie_not1, Mode::tie_all});
        op.p1_t2 = 0.0;
        op.p1_t3 = 0.0;
        op.p2_t1 = detail::tie_ratio(r11 - r2_2t3, den, "case3a p2_t1");
        op.tau1 = op.tau2 = r11;
        op.tau3 = R(z, 3, {Mode::link3, Mode::tie_not1, Mode::tie_not2, Mode::tie_all}) -
                  (1.0 - a) * (r11 - r2_2t3);
        break;
    }
    case StabilityKind::case3b: {
        const std::size_t z = sc.w_star;
        op.w_run = z;
        const double a = tbl.row(z).alpha.to_double();
        const double r11 = R(z, 1, {Mode::link1});
        const double r22 = R(z, 2, {Mode::link2});
        const double r2_2t3 = R(z, 2, {Mode::link2, Mode::tie_not3});
        const double r1_1t3 = R(z, 1, {Mode::link1, Mode::tie_not3});
        const double den = R(z, 1, {Mode::tie_not3}) + R(z, 2, {Mode::tie_not3});
        op.p1_t2 = 0.0;
        op.p2_t1 = 0.0;
        op.p1_t3 = detail::tie_ratio(r2_2t3 - r11, den, "case3b p1_t3");
        const double tau_a = r11 + (1.0 - a) * (r2_2t3 - r11);
        const double tau_b = r22 + a * (r1_1t3 - r22);
        if (std::fabs(tau_a - tau_b) > 1e-9)
            throw internal_error("case3b balanced-throughput forms disagree");
        op.tau1 = op.tau2 = tau_a;
        op.tau3 = R(z, 3, {Mode::link3, Mode::tie_not1, Mode::tie_not2, Mode::tie_all});
        break;
    }
    case StabilityKind::case3c: {
        const std::size_t z = sc.w_star;
        op.w_run = z;
        const double a = tbl.row(z).alpha.to_double();
        const double r22 = R(z, 2, {Mode::link2});
        const double r1_1t3 = R(z, 1, {Mode::link1, Mode::tie_not3});
        const double den = R(z, 1, {Mode::tie_not2, Mode::tie_all});
        op.p2_t1 = 0.0;
        op.p1_t3 = 1.0;
        op.p1_t2 = detail::tie_ratio(r22 - r1_1t3, den, "case3c p1_t2");
        op.tau1 = op.tau2 = r22;
        op.tau3 = R(z, 3, {Mode::link3, Mode::tie_not1, Mode::tie_not2, Mode::tie_all}) -
                  a * (r22 - r1_1t3);
        break;
    }
    }
    op.p2_t3 = 1.0 - op.p1_t3;
    op.alpha_run = tbl.row(op.w_run).alpha;
    op.tau_t = op.tau2 + op.tau3;

    // The balanced throughput must coincide with the lattice minimum of the
    // weighted throughput; anything else means the classification and the
    // closed forms disagree.
    const auto opt = system_throughput(tbl);
    if (std::fabs(op.tau_t - opt.tau_t) > 1e-9 * std::max(1.0, std::fabs(op.tau_t)))
        throw internal_error("operating point throughput " + std::to_string(op.tau_t) +
                             " does not match lattice minimum " + std::to_string(opt.tau_t));
    return op;
}

} // namespace bufrelay
