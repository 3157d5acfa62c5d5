// Command-line front end: closed-form link statistics, mode-probability
// tables, throughput sweeps, slot simulation and oracle cross-checks for the
// buffer-aided relay selection toolkit.
//
// Exit codes: 0 success, 1 strict-tolerance failure, 2 bad input,
// 3 internal inconsistency / numerical failure.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bufrelay/analytic.hpp"
#include "bufrelay/channel.hpp"
#include "bufrelay/config.hpp"
#include "bufrelay/lattice.hpp"
#include "bufrelay/sim.hpp"
#include "bufrelay/validate.hpp"

namespace {

using namespace bufrelay;

constexpr const char* kCsvSchema = "bufrelay-csv/1";

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &std::cout;

    static Output open(const std::string& path) {
        Output o;
        if (!path.empty()) {
            o.file = std::make_unique<std::ofstream>(path);
            if (!*o.file) throw invalid_parameter("cannot open output file: " + path);
            o.os = o.file.get();
        }
        return o;
    }
    std::ostream& stream() { return *os; }
};

std::vector<Scheme> schemes_of(int scheme) {
    if (scheme == 1) return {Scheme::relay_only};
    if (scheme == 2) return {Scheme::combined};
    return {Scheme::relay_only, Scheme::combined};
}

const std::array<Mode, 8> kCsvModeOrder{Mode::link1,    Mode::link2,    Mode::link3,
                                        Mode::tie_not1, Mode::tie_not2, Mode::tie_not3,
                                        Mode::tie_all,  Mode::none};

void csv_preamble(std::ostream& os, const char* cmd, const ExperimentConfig& cfg,
                  std::uint64_t seed) {
    os << "# " << kCsvSchema << " cmd=" << cmd << " config=" << hash_hex(cfg.config_hash)
       << " seed=" << seed << "\n";
}

int cmd_stats(const ExperimentConfig& cfg) {
    const LinkStats s = derive_stats(cfg.geometry, cfg.power);
    const RateSet rates = cfg.rate_set();
    const auto lattice = build_alpha_lattice(rates);
    const auto thr = thresholds(rates);

    std::cout << "config " << hash_hex(cfg.config_hash) << "\n";
    std::cout << "regime: " << (s.interference_limited() ? "interference-limited (gamma_max = inf)"
                                                         : "peak-power + interference caps")
              << "\n";
    const char* names[3] = {"link1 (S-R)", "link2 (R-D)", "link3 (S-D)"};
    for (int i = 0; i < 3; ++i) {
        const auto k = static_cast<std::size_t>(i);
        std::cout << names[i] << ": omega_h=" << fmt6(s.omega_h[k]) << " omega_g=" << fmt6(s.omega_g[k])
                  << " lambda=" << fmt6(s.lambda[k]) << " mu=" << fmt6(s.mu[k])
                  << " p=" << fmt6(s.p[k]) << "\n";
    }
    for (int link = 1; link <= 3; ++link) {
        std::cout << "thresholds link" << link << ":";
        const auto& t = thr.g[static_cast<std::size_t>(link - 1)];
        for (double v : t) std::cout << " " << fmt6(v);
        std::cout << "\n";
    }
    std::cout << "alpha lattice (" << lattice.values.size() << " values):";
    for (const auto& a : lattice.values) std::cout << " " << a.str();
    std::cout << "\n";
    return 0;
}

int cmd_modes(const ExperimentConfig& cfg, const std::string& out_path) {
    const LinkStats s = derive_stats(cfg.geometry, cfg.power);
    const RateSet rates = cfg.rate_set();
    const auto lattice = build_alpha_lattice(rates);

    Output out = Output::open(out_path);
    auto& os = out.stream();
    csv_preamble(os, "modes", cfg, cfg.seed);
    os << "alpha_index,alpha,alpha_exact,scheme,p_m1,p_m2,p_m3,p_t1,p_t2,p_t3,p_tN,p_N,"
          "tau_t_half\n";
    for (Scheme scheme : schemes_of(cfg.scheme)) {
        const auto tbl = mode_table(s, rates, lattice, scheme);
        for (std::size_t w = 0; w <= tbl.W(); ++w) {
            const auto& row = tbl.row(w);
            os << w << "," << fmt6(row.alpha.to_double()) << "," << row.alpha.str() << ","
               << static_cast<int>(scheme);
            for (Mode m : kCsvModeOrder) os << "," << fmt6(row.prob[mode_index(m)]);
            os << "," << fmt6(throughput_at(tbl, w) / 2.0) << "\n";
        }
    }
    return 0;
}

int cmd_throughput_sweep(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.sweep) throw invalid_parameter("throughput-sweep needs a sweep block in the config");

    Output out = Output::open(out_path);
    auto& os = out.stream();
    csv_preamble(os, "throughput-sweep", cfg, cfg.seed);
    os << "parameter,value,scheme,case,w_star,alpha_star,alpha_run,tau_buffered,tau_direct,"
          "tau_t\n";
    for (double value : cfg.sweep->values) {
        const ExperimentConfig point = with_sweep_value(cfg, cfg.sweep->parameter, value);
        const LinkStats s = derive_stats(point.geometry, point.power);
        const RateSet rates = point.rate_set();
        const auto lattice = build_alpha_lattice(rates);
        for (Scheme scheme : schemes_of(cfg.scheme)) {
            const auto tbl = mode_table(s, rates, lattice, scheme);
            const auto sc = classify_stability(tbl);
            const auto op = solve_operating_point(tbl, sc);
            os << cfg.sweep->parameter << "," << fmt6(value) << "," << static_cast<int>(scheme)
               << "," << stability_name(sc.kind) << "," << sc.w_star << ","
               << fmt6(op.alpha_star.to_double()) << "," << fmt6(op.alpha_run.to_double()) << ","
               << fmt6(op.tau1) << "," << fmt6(op.tau3) << "," << fmt6(op.tau_t) << "\n";
        }
    }
    return 0;
}

struct SimTolerances {
    double rate_rel = 0.01;
    double drift_abs = 1e-3;
};

bool within_rel(double hat, double ref, double rel) {
    if (std::fabs(ref) < 1e-12) return std::fabs(hat) < 1e-6;
    return std::fabs(hat - ref) <= rel * std::fabs(ref);
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_path, bool strict,
                 int force_alpha_index) {
    const LinkStats s = derive_stats(cfg.geometry, cfg.power);
    const RateSet rates = cfg.rate_set();
    const auto lattice = build_alpha_lattice(rates);
    const SimTolerances tol;

    Output out = Output::open(out_path);
    auto& os = out.stream();
    csv_preamble(os, "simulate", cfg, cfg.seed);
    os << "scheme,replication,seed,slots,warmup,case,alpha_run,forced,"
          "tau1_hat,tau2_hat,tau3_hat,tau_t_hat,tau1,tau2,tau3,tau_t,"
          "rel_err_tau_t,balance_rel_err,mean_occupancy,final_occupancy,occupancy_drift,"
          "underflow_slots,f_m1,f_m2,f_m3,f_t1,f_t2,f_t3,f_tN,f_N,stable\n";

    bool all_ok = true;
    for (Scheme scheme : schemes_of(cfg.scheme)) {
        const auto tbl = mode_table(s, rates, lattice, scheme);
        const auto sc = classify_stability(tbl);
        const auto op = solve_operating_point(tbl, sc);

        const bool forced = force_alpha_index >= 0;
        SimPolicy pol = forced ? forced_policy(lattice, static_cast<std::size_t>(force_alpha_index))
                               : policy_of(op);

        Rng master(cfg.seed);
        std::vector<std::future<SimReport>> runs;
        runs.reserve(static_cast<std::size_t>(cfg.replications));
        for (int rep = 0; rep < cfg.replications; ++rep) {
            const std::uint64_t rep_seed =
                cfg.replications == 1 ? cfg.seed : master.child(static_cast<std::uint64_t>(rep)).seed();
            SimConfig sim_cfg{cfg.slots, rep_seed, cfg.warmup_slots()};
            runs.push_back(std::async(std::launch::async, [=, &s, &rates]() {
                return run_simulation(sim_cfg, s, rates, pol, scheme);
            }));
        }

        for (int rep = 0; rep < cfg.replications; ++rep) {
            const SimReport r = runs[static_cast<std::size_t>(rep)].get();
            const double rel_tau_t =
                std::fabs(op.tau_t) > 0 ? std::fabs(r.tau_t_hat - op.tau_t) / op.tau_t : 0.0;
            const double balance =
                r.tau2_hat > 0 ? std::fabs(r.tau1_hat - r.tau2_hat) / r.tau2_hat
                               : std::fabs(r.tau1_hat);
            const bool stable = balance <= tol.rate_rel && std::fabs(r.occupancy_drift) <= tol.drift_abs;
            const bool converged = !forced && within_rel(r.tau_t_hat, op.tau_t, tol.rate_rel) &&
                                   within_rel(r.tau1_hat, op.tau1, tol.rate_rel) &&
                                   within_rel(r.tau2_hat, op.tau2, tol.rate_rel) &&
                                   within_rel(r.tau3_hat, op.tau3, tol.rate_rel) && stable;
            if (!forced && !converged) all_ok = false;
            if (forced && !stable) all_ok = false;

            os << static_cast<int>(scheme) << "," << rep << "," << r.seed << "," << r.slots << ","
               << r.warmup << "," << stability_name(sc.kind) << "," << fmt6(pol.alpha.to_double())
               << "," << (forced ? 1 : 0) << "," << fmt6(r.tau1_hat) << "," << fmt6(r.tau2_hat)
               << "," << fmt6(r.tau3_hat) << "," << fmt6(r.tau_t_hat) << "," << fmt6(op.tau1)
               << "," << fmt6(op.tau2) << "," << fmt6(op.tau3) << "," << fmt6(op.tau_t) << ","
               << fmt6(rel_tau_t) << "," << fmt6(balance) << "," << fmt6(r.mean_occupancy) << ","
               << fmt6(r.final_occupancy) << "," << fmt6(r.occupancy_drift) << ","
               << r.underflow_slots;
            for (Mode m : kCsvModeOrder) os << "," << fmt6(r.mode_freq[mode_index(m)]);
            os << "," << (stable ? 1 : 0) << "\n";
        }
    }
    if (strict && !all_ok) {
        std::cerr << "strict tolerances violated\n";
        return 1;
    }
    return 0;
}

int cmd_validate(const ExperimentConfig& cfg, long long draws) {
    const LinkStats s = derive_stats(cfg.geometry, cfg.power);
    const RateSet rates = cfg.rate_set();
    const auto lattice = build_alpha_lattice(rates);
    bool ok = true;
    auto report = [&](const char* name, bool pass, const std::string& detail) {
        std::cout << (pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : "  " + detail)
                  << "\n";
        if (!pass) ok = false;
    };

    // Factorization of the separate-signalling CCDF against its parts.
    {
        Rng rng(cfg.seed);
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            const double y1 = rng.uniform() * 10, y2 = rng.uniform() * 10, y3 = rng.uniform() * 10;
            worst = std::max(worst, std::fabs(joint_ccdf_scheme1(s, y1, y2, y3) -
                                              joint_ccdf_13(s, y1, y3) * ccdf_gamma2(s, y2)));
        }
        report("scheme1-ccdf-factorization", worst == 0.0, "max |err| = " + fmt6(worst));
    }

    // Quadrature path of the combined-signalling CCDF against raw frequency.
    {
        Rng rng(cfg.seed + 1);
        double worst_sigma = 0;
        for (int i = 0; i < 8; ++i) {
            const double y1 = rng.uniform() * 6, y2 = rng.uniform() * 6, y3 = rng.uniform() * 6;
            const auto mc = validate::mc_joint_ccdf(s, y1, y2, y3, Scheme::combined, draws,
                                                    cfg.seed + 100 + static_cast<std::uint64_t>(i));
            const double f = joint_ccdf_scheme2(s, y1, y2, y3);
            if (mc.std_error > 0)
                worst_sigma = std::max(worst_sigma, std::fabs(f - mc.estimate) / mc.std_error);
        }
        report("scheme2-ccdf-vs-monte-carlo", worst_sigma <= 3.0,
               "worst deviation = " + fmt6(worst_sigma) + " sigma");
    }

    // Conformance verdicts for the optional closed forms (informational; the
    // quadrature path stays authoritative either way).
    const std::vector<double> grid{0.0, 0.5, 1.0, 3.0, 10.0};
    if (s.interference_limited()) {
        const auto c = validate::scheme2_pip_conformance(s, grid);
        std::cout << "INFO scheme2-closed-form-fast-path: "
                  << (c.conforming ? "CONFORMING" : "NON-CONFORMING (quadrature authoritative)")
                  << "  max |err| = " << fmt6(c.max_abs_err) << " at (" << fmt6(c.worst_args[0])
                  << "," << fmt6(c.worst_args[1]) << "," << fmt6(c.worst_args[2]) << ")\n";
    }
    {
        const auto c = validate::scheme2_threeterm_conformance(s, grid);
        std::cout << "INFO scheme2-three-term-form: "
                  << (c.conforming ? "CONFORMING" : "NON-CONFORMING (quadrature authoritative)")
                  << "  max |err| = " << fmt6(c.max_abs_err) << "\n";
    }

    // The inverse-transmit-SNR sampling construction must reproduce the
    // direct sampler's distribution.
    {
        Rng a(cfg.seed + 2), b(cfg.seed + 3);
        const double y = 1.0;
        long long n = std::max<long long>(draws, 100000);
        long long hits_a = 0, hits_b = 0;
        for (long long i = 0; i < n; ++i) {
            if (sample_snr_triplet(s, a).g2 >= y) ++hits_a;
            if (validate::sample_snr_inverse(s, b).g2 >= y) ++hits_b;
        }
        const double pa = double(hits_a) / double(n), pb = double(hits_b) / double(n);
        const double se = std::sqrt((pa * (1 - pa) + pb * (1 - pb)) / double(n));
        report("inverse-construction-sampler", std::fabs(pa - pb) <= 3 * se,
               "|diff| = " + fmt6(std::fabs(pa - pb)) + ", 3se = " + fmt6(3 * se));
    }

    // Brute-force per-draw mode classification against the analytic table.
    for (Scheme scheme : schemes_of(cfg.scheme)) {
        const auto tbl = mode_table(s, rates, lattice, scheme);
        double worst_sigma = 0;
        for (std::size_t w = 0; w <= tbl.W(); ++w) {
            const auto freq = validate::brute_force_mode_probs(
                s, rates, lattice.values[w], scheme, draws, cfg.seed + 200 + w);
            for (Mode m : all_modes) {
                const double p = tbl.prob(w, m);
                const double se = std::sqrt(p * (1 - p) / static_cast<double>(draws));
                const double diff = std::fabs(freq[mode_index(m)] - p);
                if (se > 0)
                    worst_sigma = std::max(worst_sigma, diff / se);
                else if (diff > 0)
                    worst_sigma = std::max(worst_sigma, 1e9);
            }
        }
        report(scheme == Scheme::relay_only ? "mode-probabilities-scheme1"
                                            : "mode-probabilities-scheme2",
               worst_sigma <= 3.0, "worst deviation = " + fmt6(worst_sigma) + " sigma");
    }

    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"buffer-aided underlay relay throughput toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, scheme_arg;
    std::uint64_t seed = 0;
    bool seed_set = false, strict = false;
    long long slots = 0;
    bool slots_set = false;
    int replications = 0;
    int force_alpha_index = -1;
    long long draws = 1'000'000;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--scheme", scheme_arg, "1, 2 or both (overrides config)");
        if (with_out) sub->add_option("--out", out_path, "CSV output path (default stdout)");
    };

    auto* stats = app.add_subcommand("stats", "print derived link statistics and the alpha lattice");
    add_common(stats, false);

    auto* modes = app.add_subcommand("modes", "mode probabilities and weighted throughput per alpha");
    add_common(modes, true);

    auto* sweep = app.add_subcommand("throughput-sweep", "analytic throughput across a parameter sweep");
    add_common(sweep, true);

    auto* simulate = app.add_subcommand("simulate", "slot simulation at the solved operating point");
    add_common(simulate, true);
    simulate->add_option("--seed", seed, "simulation master seed")->each([&](const std::string&) { seed_set = true; });
    simulate->add_option("--slots", slots, "slots per replication")->each([&](const std::string&) { slots_set = true; });
    simulate->add_option("--replications", replications, "independent replications");
    simulate->add_flag("--strict", strict, "exit 1 when convergence tolerances are violated");
    simulate->add_option("--force-alpha-index", force_alpha_index,
                         "negative control: run at this lattice weight instead of the solved one");

    auto* validate_cmd = app.add_subcommand("validate", "run the oracle cross-checks");
    add_common(validate_cmd, false);
    validate_cmd->add_option("--draws", draws, "Monte Carlo draws per check");
    validate_cmd->add_option("--seed", seed, "oracle seed")->each([&](const std::string&) { seed_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg = bufrelay::load_config_file(config_path);
        if (!scheme_arg.empty()) {
            if (scheme_arg == "1")
                cfg.scheme = 1;
            else if (scheme_arg == "2")
                cfg.scheme = 2;
            else if (scheme_arg == "both")
                cfg.scheme = 3;
            else
                throw bufrelay::invalid_parameter("--scheme must be 1, 2 or both");
        }
        if (seed_set) cfg.seed = seed;
        if (slots_set) {
            if (slots < 1) throw bufrelay::invalid_parameter("--slots must be positive");
            cfg.slots = slots;
        }
        if (replications > 0) cfg.replications = replications;

        if (app.got_subcommand(stats)) return cmd_stats(cfg);
        if (app.got_subcommand(modes)) return cmd_modes(cfg, out_path);
        if (app.got_subcommand(sweep)) return cmd_throughput_sweep(cfg, out_path);
        if (app.got_subcommand(simulate)) return cmd_simulate(cfg, out_path, strict, force_alpha_index);
        if (app.got_subcommand(validate_cmd)) return cmd_validate(cfg, draws);
        return 2;
    } catch (const bufrelay::invalid_parameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bufrelay::internal_error& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return 3;
    } catch (const bufrelay::numeric_failure& e) {
        std::cerr << "numerical failure: " << e.what() << " (achieved " << e.achieved << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
