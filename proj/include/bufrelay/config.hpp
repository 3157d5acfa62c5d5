#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bufrelay/channel.hpp"
#include "bufrelay/errors.hpp"
#include "bufrelay/lattice.hpp"
#include "bufrelay/rational.hpp"

namespace bufrelay {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Rate specification: either an explicit list shared by source and relay, or
/// K uniformly spaced levels k*S for k = 0..K.
struct RateSpec {
    enum class Kind { list, scaled } kind = Kind::scaled;
    std::vector<Rational> list;
    int levels = 1;
    Rational scale = Rational(1);

    std::vector<Rational> rates() const {
        if (kind == Kind::list) return list;
        std::vector<Rational> r;
        r.reserve(static_cast<std::size_t>(levels) + 1);
        for (int k = 0; k <= levels; ++k) r.push_back(Rational(k) * scale);
        return r;
    }
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct ExperimentConfig {
    SystemGeometry geometry;
    PowerConstraints power; // linear scale; dB converted at ingestion
    RateSpec rate_spec;
    int scheme = 3; // 1, 2, or 3 = both
    long long slots = 1'000'000;
    std::uint64_t seed = 1;
    double warmup_frac = 0.01;
    int replications = 1;
    std::optional<SweepSpec> sweep;
    std::uint64_t config_hash = 0;

    RateSet rate_set() const {
        auto r = rate_spec.rates();
        return RateSet(r, r);
    }
    long long warmup_slots() const {
        return static_cast<long long>(static_cast<double>(slots) * warmup_frac);
    }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline Rational rational_field(const nlohmann::json& j, const char* what) {
    if (j.is_string()) return Rational::from_decimal(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_number()) return Rational::from_double(j.get<double>());
    throw invalid_parameter(std::string(what) + " must be a number or decimal string");
}

inline double number_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw invalid_parameter(std::string("missing or non-numeric field: ") + key);
    return j.at(key).get<double>();
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    c.config_hash = detail::fnv1a(j.dump());

    if (!j.contains("geometry")) throw invalid_parameter("missing field: geometry");
    const auto& g = j.at("geometry");
    c.geometry.d1 = detail::number_field(g, "d1");
    c.geometry.d2 = detail::number_field(g, "d2");
    c.geometry.d3 = detail::number_field(g, "d3");
    c.geometry.d1p = detail::number_field(g, "d1p");
    c.geometry.d2p = detail::number_field(g, "d2p");
    c.geometry.alpha_pl = g.contains("alpha_pl") ? detail::number_field(g, "alpha_pl") : 3.0;

    if (!j.contains("power")) throw invalid_parameter("missing field: power");
    const auto& p = j.at("power");
    if (!p.contains("gamma_max_db")) throw invalid_parameter("missing field: power.gamma_max_db");
    const auto& gm = p.at("gamma_max_db");
    if (gm.is_string()) {
        if (gm.get<std::string>() != "inf")
            throw invalid_parameter("power.gamma_max_db must be a number or \"inf\"");
        c.power.gamma_max = std::numeric_limits<double>::infinity();
    } else if (gm.is_number()) {
        c.power.gamma_max = db_to_linear(gm.get<double>());
    } else {
        throw invalid_parameter("power.gamma_max_db must be a number or \"inf\"");
    }
    c.power.gamma_p = db_to_linear(detail::number_field(p, "gamma_p_db"));

    if (!j.contains("rates")) throw invalid_parameter("missing field: rates");
    const auto& r = j.at("rates");
    if (r.contains("list")) {
        c.rate_spec.kind = RateSpec::Kind::list;
        if (!r.at("list").is_array() || r.at("list").empty())
            throw invalid_parameter("rates.list must be a nonempty array");
        for (const auto& item : r.at("list"))
            c.rate_spec.list.push_back(detail::rational_field(item, "rates.list entry"));
        if (c.rate_spec.list.empty() || !c.rate_spec.list.front().is_zero())
            c.rate_spec.list.insert(c.rate_spec.list.begin(), Rational(0));
    } else if (r.contains("levels")) {
        c.rate_spec.kind = RateSpec::Kind::scaled;
        if (!r.at("levels").is_number_integer() || r.at("levels").get<int>() < 1)
            throw invalid_parameter("rates.levels must be a positive integer");
        c.rate_spec.levels = r.at("levels").get<int>();
        c.rate_spec.scale =
            r.contains("scale") ? detail::rational_field(r.at("scale"), "rates.scale") : Rational(1);
        if (!(Rational(0) < c.rate_spec.scale))
            throw invalid_parameter("rates.scale must be positive");
    } else {
        throw invalid_parameter("rates must contain either \"list\" or \"levels\"");
    }

    if (j.contains("scheme")) {
        const auto& s = j.at("scheme");
        if (s.is_string()) {
            const auto v = s.get<std::string>();
            if (v == "1")
                c.scheme = 1;
            else if (v == "2")
                c.scheme = 2;
            else if (v == "both")
                c.scheme = 3;
            else
                throw invalid_parameter("scheme must be 1, 2 or \"both\"");
        } else if (s.is_number_integer() && (s.get<int>() == 1 || s.get<int>() == 2)) {
            c.scheme = s.get<int>();
        } else {
            throw invalid_parameter("scheme must be 1, 2 or \"both\"");
        }
    }

    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        if (s.contains("slots")) c.slots = s.at("slots").get<long long>();
        if (s.contains("seed")) c.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("warmup")) c.warmup_frac = s.at("warmup").get<double>();
        if (s.contains("replications")) c.replications = s.at("replications").get<int>();
        if (c.slots < 1) throw invalid_parameter("sim.slots must be positive");
        if (c.warmup_frac < 0 || c.warmup_frac >= 1)
            throw invalid_parameter("sim.warmup must be in [0, 1)");
        if (c.replications < 1) throw invalid_parameter("sim.replications must be positive");
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        SweepSpec sw;
        if (!s.contains("parameter") || !s.at("parameter").is_string())
            throw invalid_parameter("sweep.parameter must be a string");
        sw.parameter = s.at("parameter").get<std::string>();
        if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty())
            throw invalid_parameter("sweep.values must be a nonempty array");
        for (const auto& v : s.at("values")) sw.values.push_back(v.get<double>());
        c.sweep = std::move(sw);
    }
    return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_parameter("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw invalid_parameter("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

/// Applies one sweep value to a copy of the base config. Supported parameter
/// names: the five distances, alpha_pl, gamma_p_db, gamma_max_db and S (the
/// rate scale, which requires a levels-based rate spec).
inline ExperimentConfig with_sweep_value(const ExperimentConfig& base, const std::string& param,
                                         double value) {
    ExperimentConfig c = base;
    if (param == "gamma_p_db")
        c.power.gamma_p = db_to_linear(value);
    else if (param == "gamma_max_db")
        c.power.gamma_max = db_to_linear(value);
    else if (param == "d1")
        c.geometry.d1 = value;
    else if (param == "d2")
        c.geometry.d2 = value;
    else if (param == "d3")
        c.geometry.d3 = value;
    else if (param == "d1p")
        c.geometry.d1p = value;
    else if (param == "d2p")
        c.geometry.d2p = value;
    else if (param == "alpha_pl")
        c.geometry.alpha_pl = value;
    else if (param == "S") {
        if (base.rate_spec.kind != RateSpec::Kind::scaled)
            throw invalid_parameter("sweeping S requires a levels/scale rate spec");
        c.rate_spec.scale = Rational::from_double(value);
        if (!(Rational(0) < c.rate_spec.scale))
            throw invalid_parameter("swept S must be positive");
    } else {
        throw invalid_parameter("unknown sweep parameter: " + param);
    }
    return c;
}

} // namespace bufrelay
