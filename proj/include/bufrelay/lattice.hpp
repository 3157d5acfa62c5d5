#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <vector>

#include "bufrelay/errors.hpp"
#include "bufrelay/rational.hpp"

namespace bufrelay {

/// Signalling scheme for the relay-to-destination hop.
///   relay_only: destination decodes the relay's signal alone.
///   combined:   source and relay send an orthogonal space-time codeword, so
///               the destination decodes from the sum SNR g2 + g3.
enum class Scheme : int { relay_only = 1, combined = 2 };

/// Which links can transmit at nonzero rate in a slot, after the decision
/// metrics are compared. tie_notK means "every link except K ties at the
/// maximum"; tie_all is a three-way tie; none is silence.
enum class Mode : int {
    none = 0,
    link1,
    link2,
    link3,
    tie_not1,
    tie_not2,
    tie_not3,
    tie_all,
};

inline constexpr std::array<Mode, 8> all_modes{
    Mode::none,     Mode::link1,    Mode::link2,    Mode::link3,
    Mode::tie_not1, Mode::tie_not2, Mode::tie_not3, Mode::tie_all,
};

inline constexpr const char* mode_name(Mode m) {
    constexpr const char* names[8] = {"N", "1", "2", "3", "~1", "~2", "~3", "~N"};
    return names[static_cast<int>(m)];
}

inline constexpr std::size_t mode_index(Mode m) { return static_cast<std::size_t>(m); }

/// Ascending transmission rates for the two transmitters, exact rationals in
/// bits per slot. The source uses `r1` on both of its links (relay hop and
/// direct path); the relay uses `r2`. Every vector starts at rate 0.
class RateSet {
public:
    RateSet(std::vector<Rational> source_rates, std::vector<Rational> relay_rates)
        : r1_(std::move(source_rates)), r2_(std::move(relay_rates)) {
        validate(r1_);
        validate(r2_);
        bool any_nonzero = r1_.size() > 1 || r2_.size() > 1;
        if (!any_nonzero) throw invalid_parameter("rate set needs at least one nonzero rate");
    }

    const std::vector<Rational>& r1() const { return r1_; }
    const std::vector<Rational>& r2() const { return r2_; }
    const std::vector<Rational>& r3() const { return r1_; } // direct path shares the source's rates

    int K1() const { return static_cast<int>(r1_.size()) - 1; }
    int K2() const { return static_cast<int>(r2_.size()) - 1; }
    int K3() const { return K1(); }

    bool symmetric() const { return r1_ == r2_; }

private:
    static void validate(const std::vector<Rational>& r) {
        if (r.empty() || !r.front().is_zero())
            throw invalid_parameter("rate vector must start at 0");
        for (std::size_t i = 1; i < r.size(); ++i)
            if (!(r[i - 1] < r[i]))
                throw invalid_parameter("rate vector must be strictly ascending");
    }

    std::vector<Rational> r1_, r2_;
};

/// Decoding SNR thresholds 2^R - 1 per link, with a +inf sentinel appended so
/// that index K+1 is always addressable.
struct SnrThresholds {
    std::array<std::vector<double>, 3> g;

    double at(int link, int k) const { return g[static_cast<std::size_t>(link - 1)][static_cast<std::size_t>(k)]; }
};

inline SnrThresholds thresholds(const RateSet& rates) {
    auto to_thr = [](const std::vector<Rational>& r) {
        std::vector<double> t;
        t.reserve(r.size() + 1);
        for (const auto& rate : r) t.push_back(std::exp2(rate.to_double()) - 1.0);
        t.push_back(std::numeric_limits<double>::infinity());
        return t;
    };
    SnrThresholds t;
    t.g[0] = to_thr(rates.r1());
    t.g[1] = to_thr(rates.r2());
    t.g[2] = t.g[0];
    return t;
}

struct RateTripletIndex {
    int k1 = 0, k2 = 0, k3 = 0;
    friend bool operator==(const RateTripletIndex& a, const RateTripletIndex& b) {
        return a.k1 == b.k1 && a.k2 == b.k2 && a.k3 == b.k3;
    }
};

/// The sorted set of weight values at which decision-metric ties between
/// links are possible. Endpoints 0 and 1 are always present.
struct AlphaLattice {
    std::vector<Rational> values;

    std::size_t W() const { return values.size() - 1; }
    const Rational& alpha(std::size_t w) const { return values[w]; }
};

/// Collects every tie candidate generated by pairs of discrete rates:
/// 1 - R3/R2, R2/(R2+R1) and R3/R1 over all index pairs with a nonzero
/// denominator. Candidates outside [0, 1] cannot correspond to an admissible
/// weight (they arise only when the direct rate exceeds the others, where
/// link 3 wins outright) and are dropped.
inline AlphaLattice build_alpha_lattice(const RateSet& rates) {
    std::set<Rational> vals{Rational(0), Rational(1)};
    const Rational zero(0), one(1);
    auto keep = [&](const Rational& c) {
        if (zero <= c && c <= one) vals.insert(c);
    };
    for (const auto& r3 : rates.r3()) {
        for (const auto& r2 : rates.r2())
            if (!r2.is_zero()) keep(one - r3 / r2);
        for (const auto& r1 : rates.r1())
            if (!r1.is_zero()) keep(r3 / r1);
    }
    for (const auto& r1 : rates.r1())
        for (const auto& r2 : rates.r2())
            if (!(r1.is_zero() && r2.is_zero())) keep(r2 / (r1 + r2));
    return AlphaLattice{std::vector<Rational>(vals.begin(), vals.end())};
}

/// The three rate decision metrics (alpha*R1, (1-alpha)*R2, R3) at a triplet
/// of rate indices, as exact rationals.
inline std::array<Rational, 3> decision_metrics(const Rational& alpha, const RateTripletIndex& t,
                                                const RateSet& rates) {
    return {alpha * rates.r1()[static_cast<std::size_t>(t.k1)],
            (Rational(1) - alpha) * rates.r2()[static_cast<std::size_t>(t.k2)],
            rates.r3()[static_cast<std::size_t>(t.k3)]};
}

/// Mode implied by a metric triple, with exact tie detection.
inline Mode classify_metrics(const std::array<Rational, 3>& m) {
    const Rational* mx = &m[0];
    if (m[1] > *mx) mx = &m[1];
    if (m[2] > *mx) mx = &m[2];
    if (mx->is_zero()) return Mode::none;
    const bool t0 = m[0] == *mx, t1 = m[1] == *mx, t2 = m[2] == *mx;
    const int ties = int(t0) + int(t1) + int(t2);
    if (ties == 3) return Mode::tie_all;
    if (ties == 1) return t0 ? Mode::link1 : (t1 ? Mode::link2 : Mode::link3);
    if (!t0) return Mode::tie_not1;
    if (!t1) return Mode::tie_not2;
    return Mode::tie_not3;
}

inline Mode classify_mode(const Rational& alpha, const RateTripletIndex& t, const RateSet& rates) {
    return classify_metrics(decision_metrics(alpha, t, rates));
}

/// Partition of the admissible rate-index constellation into the eight modes
/// at a given weight. relay_only admits the full cuboid of triplets; combined
/// excludes k2 < k3, which carries zero probability there.
inline std::array<std::vector<RateTripletIndex>, 8>
enumerate_domain_sets(const Rational& alpha, const RateSet& rates, Scheme scheme) {
    std::array<std::vector<RateTripletIndex>, 8> sets;
    for (int k1 = 0; k1 <= rates.K1(); ++k1)
        for (int k2 = 0; k2 <= rates.K2(); ++k2)
            for (int k3 = 0; k3 <= rates.K3(); ++k3) {
                if (scheme == Scheme::combined && k2 < k3) continue;
                RateTripletIndex t{k1, k2, k3};
                sets[mode_index(classify_mode(alpha, t, rates))].push_back(t);
            }
    return sets;
}

} // namespace bufrelay
