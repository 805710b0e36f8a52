// cli.hpp — command-line front end: configuration, model resolution, and the
// simulate / integrate / verify / demo commands
//
// Precedence for every setting: CLI flag > environment (EVENTUM_SEED) >
// config file > documented default. stdout carries the human summary only;
// machine-readable outputs go to files under --out.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "eventum/ensemble.hpp"
#include "eventum/errors.hpp"
#include "eventum/fixtures.hpp"
#include "eventum/io.hpp"
#include "eventum/lindblad.hpp"
#include "eventum/model.hpp"
#include "eventum/models.hpp"
#include "eventum/pdp.hpp"
#include "eventum/random_models.hpp"
#include "eventum/stats.hpp"

namespace eventum {

struct RunConfig {
    std::string command;
    std::string model;
    std::string demo_target;
    double t_start = 0.0;
    double t_end = 1.0;
    std::vector<int> n_list = {1000};
    std::uint64_t master_seed = 0;
    double base_step = 1e-2;
    double root_tol = 1e-10;
    double dt = 0.0;  // master-equation step; 0 selects the default
    std::vector<double> checkpoints;
    std::string output_dir = ".";
    bool log_compact = true;
    int jobs = 0;  // 0 = hardware concurrency

    // Flat builtin-model overrides (kappa, width, grid.N, ...).
    Json model_params = Json::object();

    // Presence markers so commands can pick sensible defaults.
    bool n_given = false;
    bool t_end_given = false;
    bool base_step_given = false;

    int n() const {
        if (n_list.size() != 1 || n_list.front() < 1) {
            throw UsageError("this command needs a single positive --n");
        }
        return n_list.front();
    }

    int effective_jobs() const {
        if (jobs > 0) return jobs;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("cannot parse integer list entry '" + tok + "'");
        }
    }
    if (out.empty()) throw UsageError("empty integer list");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("cannot parse number list entry '" + tok + "'");
        }
    }
    if (out.empty()) throw UsageError("empty number list");
    return out;
}

inline const std::vector<std::string>& model_param_keys() {
    static const std::vector<std::string> keys = {
        "kappa",   "width", "a",     "grid.N",     "grid.L",
        "i_max",   "dim",   "wrap",  "horizon",    "x0",
        "sigma0",  "model_seed",     "hamiltonian", "initial"};
    return keys;
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
    std::vector<std::string> known = {
        "model", "seed",        "n",        "t_start",  "t_end",
        "dt",    "base_step",   "root_tol", "jobs",     "out",
        "checkpoints",          "log_compact"};
    for (const auto& k : model_param_keys()) known.push_back(k);
    reject_unknown_keys(j, known, "config");

    if (j.contains("model")) cfg.model = j["model"].get<std::string>();
    if (j.contains("seed")) cfg.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n")) {
        if (j["n"].is_array()) {
            cfg.n_list = j["n"].get<std::vector<int>>();
        } else {
            cfg.n_list = {j["n"].get<int>()};
        }
        cfg.n_given = true;
    }
    if (j.contains("t_start")) cfg.t_start = j["t_start"].get<double>();
    if (j.contains("t_end")) {
        cfg.t_end = j["t_end"].get<double>();
        cfg.t_end_given = true;
    }
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("base_step")) {
        cfg.base_step = j["base_step"].get<double>();
        cfg.base_step_given = true;
    }
    if (j.contains("root_tol")) cfg.root_tol = j["root_tol"].get<double>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("out")) cfg.output_dir = j["out"].get<std::string>();
    if (j.contains("checkpoints")) {
        cfg.checkpoints = j["checkpoints"].get<std::vector<double>>();
    }
    if (j.contains("log_compact")) cfg.log_compact = j["log_compact"].get<bool>();
    for (const auto& k : model_param_keys()) {
        if (j.contains(k)) cfg.model_params[k] = j[k];
    }
}

}  // namespace detail

/// Build a validated RunConfig from argv-style arguments and the process
/// environment. Unknown flags and config keys are rejected.
inline RunConfig parse_and_validate(const std::vector<std::string>& args,
                                    const std::map<std::string, std::string>& env) {
    CLI::App app{"eventum — hybrid quantum-classical event dynamics"};
    app.require_subcommand(1);

    std::string model;
    std::string config_path;
    std::string n_str;
    std::string checkpoints_str;
    std::uint64_t seed = 0;
    double t_start = 0.0, t_end = 0.0, dt = 0.0, base_step = 0.0,
           root_tol = 0.0;
    int jobs = 0;
    std::string out_dir;
    bool verbose_series = false;
    std::string demo_target;

    // Builtin-model overrides.
    double kappa = 0.0, width = 0.0, a_pos = 0.0, grid_l = 0.0, x0 = 0.0,
           sigma0 = 0.0, horizon = 0.0;
    int grid_n = 0, i_max = 0, dim = 0;
    std::uint64_t model_seed = 0;
    std::string hamiltonian;
    bool wrap = false;

    std::map<std::string, CLI::Option*> opt;
    auto add_common = [&](CLI::App* cmd) {
        const std::string p = cmd->get_name() + ".";
        opt[p + "model"] = cmd->add_option("--model", model,
                                           "builtin name or model file path");
        opt[p + "config"] = cmd->add_option("--config", config_path,
                                            "JSON config file");
        opt[p + "seed"] = cmd->add_option("--seed", seed, "master seed");
        opt[p + "n"] = cmd->add_option("--n", n_str,
                                       "trajectory count (verify: comma list)");
        opt[p + "t-start"] = cmd->add_option("--t-start", t_start, "start time");
        opt[p + "t-end"] = cmd->add_option("--t-end", t_end, "horizon");
        opt[p + "dt"] = cmd->add_option("--dt", dt, "master-equation step");
        opt[p + "base-step"] =
            cmd->add_option("--base-step", base_step, "trajectory outer step");
        opt[p + "root-tol"] =
            cmd->add_option("--root-tol", root_tol, "event-time norm tolerance");
        opt[p + "jobs"] = cmd->add_option("--jobs", jobs, "worker threads");
        opt[p + "out"] = cmd->add_option("--out", out_dir, "output directory");
        opt[p + "checkpoints"] = cmd->add_option("--checkpoints", checkpoints_str,
                                                 "comma list of times");
        opt[p + "verbose-series"] = cmd->add_flag(
            "--verbose-series", verbose_series, "include raw matrix entries");
        opt[p + "kappa"] = cmd->add_option("--kappa", kappa, "model kappa");
        opt[p + "width"] = cmd->add_option("--width", width, "detector width");
        opt[p + "a"] = cmd->add_option("--a", a_pos, "detector position");
        opt[p + "grid.N"] = cmd->add_option("--grid.N", grid_n, "grid points");
        opt[p + "grid.L"] = cmd->add_option("--grid.L", grid_l, "domain length");
        opt[p + "i-max"] = cmd->add_option("--i-max", i_max, "clock truncation");
        opt[p + "dim"] = cmd->add_option("--dim", dim, "clock site dimension");
        opt[p + "wrap"] = cmd->add_flag("--wrap", wrap, "cyclic clock pointer");
        opt[p + "horizon"] =
            cmd->add_option("--horizon", horizon, "model horizon hint");
        opt[p + "x0"] = cmd->add_option("--x0", x0, "packet center");
        opt[p + "sigma0"] = cmd->add_option("--sigma0", sigma0, "packet sigma");
        opt[p + "model-seed"] =
            cmd->add_option("--model-seed", model_seed, "builtin model seed");
        opt[p + "hamiltonian"] = cmd->add_option("--hamiltonian", hamiltonian,
                                                 "detector kind: shift|zero");
    };

    CLI::App* sim = app.add_subcommand("simulate", "sample event histories");
    CLI::App* integ = app.add_subcommand("integrate", "solve the master equation");
    CLI::App* verify =
        app.add_subcommand("verify", "trajectory vs master-equation agreement");
    CLI::App* demo = app.add_subcommand("demo", "built-in reproductions");
    demo->add_option("target", demo_target, "detector or clock")->required();
    for (CLI::App* cmd : {sim, integ, verify, demo}) add_common(cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help() << std::flush;
        throw;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig cfg;
    CLI::App* active = app.get_subcommands().front();
    cfg.command = active->get_name();
    const std::string p = cfg.command + ".";
    auto given = [&](const std::string& name) {
        const auto it = opt.find(p + name);
        return it != opt.end() && it->second->count() > 0;
    };

    // config file < environment < flags
    if (given("config")) detail::apply_config_file(cfg, config_path);
    if (const auto it = env.find("EVENTUM_SEED"); it != env.end()) {
        try {
            cfg.master_seed = std::stoull(it->second);
        } catch (const std::exception&) {
            throw UsageError("EVENTUM_SEED is not an unsigned integer: '" +
                             it->second + "'");
        }
    }
    if (given("model")) cfg.model = model;
    if (given("seed")) cfg.master_seed = seed;
    if (given("n")) {
        cfg.n_list = detail::parse_int_list(n_str);
        cfg.n_given = true;
    }
    if (given("t-start")) cfg.t_start = t_start;
    if (given("t-end")) {
        cfg.t_end = t_end;
        cfg.t_end_given = true;
    }
    if (given("dt")) cfg.dt = dt;
    if (given("base-step")) {
        cfg.base_step = base_step;
        cfg.base_step_given = true;
    }
    if (given("root-tol")) cfg.root_tol = root_tol;
    if (given("jobs")) cfg.jobs = jobs;
    if (given("out")) cfg.output_dir = out_dir;
    if (given("checkpoints")) {
        cfg.checkpoints = detail::parse_double_list(checkpoints_str);
    }
    if (given("verbose-series")) cfg.log_compact = !verbose_series;
    if (given("kappa")) cfg.model_params["kappa"] = kappa;
    if (given("width")) cfg.model_params["width"] = width;
    if (given("a")) cfg.model_params["a"] = a_pos;
    if (given("grid.N")) cfg.model_params["grid.N"] = grid_n;
    if (given("grid.L")) cfg.model_params["grid.L"] = grid_l;
    if (given("i-max")) cfg.model_params["i_max"] = i_max;
    if (given("dim")) cfg.model_params["dim"] = dim;
    if (given("wrap")) cfg.model_params["wrap"] = wrap;
    if (given("horizon")) cfg.model_params["horizon"] = horizon;
    if (given("x0")) cfg.model_params["x0"] = x0;
    if (given("sigma0")) cfg.model_params["sigma0"] = sigma0;
    if (given("model-seed")) cfg.model_params["model_seed"] = model_seed;
    if (given("hamiltonian")) cfg.model_params["hamiltonian"] = hamiltonian;
    cfg.demo_target = demo_target;

    // Validation shared by every command.
    if (cfg.command == "demo") {
        if (cfg.demo_target != "detector" && cfg.demo_target != "clock") {
            throw UsageError("demo target must be 'detector' or 'clock'");
        }
    } else if (cfg.model.empty()) {
        throw UsageError("--model is required (builtin name or file path)");
    }
    if (cfg.t_end_given && cfg.t_end <= cfg.t_start) {
        throw UsageError("--t-end must exceed --t-start");
    }
    if (cfg.base_step <= 0.0 || cfg.root_tol <= 0.0) {
        throw UsageError("tolerances and steps must be positive");
    }
    if (cfg.dt < 0.0) throw UsageError("--dt must be positive");
    for (int v : cfg.n_list) {
        if (v < 1) throw UsageError("--n entries must be >= 1");
    }
    return cfg;
}

// ------------------------- model resolution --------------------------------

struct ResolvedModel {
    HybridModel model;
    PureHybridState initial;
    std::string name;
};

namespace detail {

inline PureHybridState initial_from_json(const HybridModel& model,
                                         const Json& j) {
    reject_unknown_keys(j, {"alpha", "psi"}, "initial");
    const int alpha = j.at("alpha").get<int>() - 1;  // one-based in files
    if (alpha < 0 || alpha >= model.num_states()) {
        throw UsageError("initial.alpha outside 1.." +
                         std::to_string(model.num_states()));
    }
    Vector psi;
    if (j.contains("psi")) {
        const Json& pj = j.at("psi");
        psi = Vector(pj.size());
        for (std::size_t i = 0; i < pj.size(); ++i) {
            if (!pj[i].is_array() || pj[i].size() != 2) {
                throw UsageError("initial.psi entries must be [re, im]");
            }
            psi(static_cast<Eigen::Index>(i)) =
                Complex(pj[i][0].get<double>(), pj[i][1].get<double>());
        }
        if (psi.size() != model.dim(alpha)) {
            throw UsageError("initial.psi has wrong length");
        }
        const double n = psi.norm();
        if (n <= 0.0) throw UsageError("initial.psi is zero");
        psi /= n;
    } else {
        psi = Vector::Zero(model.dim(alpha));
        psi(0) = 1.0;
    }
    return PureHybridState{alpha, std::move(psi), true};
}

}  // namespace detail

inline ResolvedModel resolve_model(const RunConfig& cfg) {
    const Json& mp = cfg.model_params;
    ResolvedModel rm;
    rm.name = cfg.model;

    if (std::filesystem::exists(cfg.model)) {
        rm.model = load_model_file(cfg.model);
        rm.initial = mp.contains("initial")
                         ? detail::initial_from_json(rm.model, mp.at("initial"))
                         : fixtures::ground_initial(rm.model);
        return rm;
    }

    const double horizon = mp.value("horizon", cfg.t_end - cfg.t_start);
    if (cfg.model == "testpair" || cfg.model == "testtriple") {
        const std::uint64_t seed = mp.value("model_seed", kDefaultModelSeed);
        rm.model = cfg.model == "testpair" ? build_testpair_model(seed)
                                           : build_testtriple_model(seed);
        rm.initial = fixtures::ground_initial(rm.model);
        return rm;
    }
    if (cfg.model == "clock") {
        ClockSpec spec;
        spec.kappa = mp.value("kappa", 1.0);
        spec.i_max = mp.value("i_max", 0);
        spec.horizon = horizon;
        spec.dim = mp.value("dim", 2);
        spec.wrap = mp.value("wrap", false);
        rm.model = build_clock_model(spec);
        rm.initial = fixtures::ground_initial(rm.model);
        return rm;
    }
    if (cfg.model == "detector1d") {
        DetectorSpec spec;
        spec.kappa = mp.value("kappa", 1.0);
        spec.width = mp.value("width", 288.0);
        spec.a = mp.value("a", 2.0);
        spec.grid.length = mp.value("grid.L", 19.2);
        spec.grid.n = mp.value("grid.N", 1152);
        spec.horizon = horizon;
        const std::string kind = mp.value("hamiltonian", std::string("shift"));
        if (kind == "shift") {
            spec.hamiltonian = DetectorSpec::Kind::Shift;
        } else if (kind == "zero") {
            spec.hamiltonian = DetectorSpec::Kind::Zero;
        } else {
            throw UsageError("detector1d: hamiltonian must be shift or zero");
        }
        rm.model = build_detector_model(spec);
        const Vector psi0 = gaussian_packet(spec.grid, mp.value("x0", -1.0),
                                            mp.value("sigma0", 1.0));
        rm.initial = PureHybridState{0, psi0, true};
        return rm;
    }
    throw UsageError("unknown model '" + cfg.model +
                     "' (builtins: detector1d, clock, testpair, testtriple)");
}

// ------------------------------ commands -----------------------------------

namespace detail {

inline EngineConfig engine_config(const RunConfig& cfg, bool record_states) {
    EngineConfig ec;
    ec.base_step = cfg.base_step;
    ec.root_tol = cfg.root_tol;
    ec.record_states = record_states;
    return ec;
}

inline std::filesystem::path ensure_outdir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct CheckRow {
    std::string label;
    double observed = 0.0;
    double expected = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline bool print_check_table(const std::vector<CheckRow>& rows) {
    bool all = true;
    std::printf("%-34s %14s %14s %12s  %s\n", "check", "observed", "expected",
                "bound", "status");
    for (const auto& r : rows) {
        std::printf("%-34s %14.6g %14.6g %12.4g  %s\n", r.label.c_str(),
                    r.observed, r.expected, r.bound, r.pass ? "PASS" : "FAIL");
        all = all && r.pass;
    }
    return all;
}

inline int cmd_simulate(const RunConfig& cfg) {
    const ResolvedModel rm = resolve_model(cfg);
    const EngineConfig ec = engine_config(cfg, false);
    const auto records =
        run_ensemble(rm.model, rm.initial, cfg.t_start, cfg.t_end,
                     cfg.master_seed, cfg.n(), cfg.effective_jobs(), ec);
    const auto dir = ensure_outdir(cfg);

    std::ofstream events(dir / "events.jsonl", std::ios::binary);
    if (!events) throw Error("cannot write events.jsonl");
    write_events_jsonl(events, records);
    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    if (!summary) throw Error("cannot write summary.csv");
    write_summary_csv(summary, records);

    std::size_t total_events = 0;
    for (const auto& r : records) total_events += r.events.size();
    std::cout << "simulate: model=" << rm.name << " n=" << records.size()
              << " events=" << total_events << " seed=" << cfg.master_seed
              << "\nwrote " << (dir / "events.jsonl").string() << " and "
              << (dir / "summary.csv").string() << "\n";
    return 0;
}

inline int cmd_integrate(const RunConfig& cfg) {
    const ResolvedModel rm = resolve_model(cfg);
    DensityFamily family0 = make_pure_family(rm.model, rm.initial);
    family0.t = cfg.t_start;

    IntegrationOptions opts;
    opts.dt = cfg.dt;
    const double dt_eff = opts.dt > 0.0 ? opts.dt : default_master_dt(rm.model);
    const double span = cfg.t_end - cfg.t_start;
    opts.save_stride =
        std::max(1, static_cast<int>(span / dt_eff / 500.0));
    const auto series = integrate(rm.model, std::move(family0), cfg.t_end, opts);

    const auto dir = ensure_outdir(cfg);
    std::ofstream ts(dir / "timeseries.csv", std::ios::binary);
    if (!ts) throw Error("cannot write timeseries.csv");
    write_timeseries_csv(ts, series, !cfg.log_compact);
    std::cout << "integrate: model=" << rm.name << " rows=" << series.size()
              << " dt=" << fmt_double(dt_eff) << " final_trace="
              << fmt_double(series.back().total_trace()) << "\nwrote "
              << (dir / "timeseries.csv").string() << "\n";
    return 0;
}

inline int cmd_verify(const RunConfig& cfg) {
    const ResolvedModel rm = resolve_model(cfg);
    std::vector<double> checkpoints = cfg.checkpoints;
    if (checkpoints.empty()) checkpoints = {cfg.t_end};
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        seeds.push_back(cfg.master_seed + 1000003u * i);
    }
    const EngineConfig ec = engine_config(cfg, true);
    IntegrationOptions mopts;
    mopts.dt = cfg.dt;
    const ConvergenceReport report =
        convergence_report(rm.model, rm.initial, cfg.t_start, checkpoints,
                           cfg.n_list, seeds, cfg.effective_jobs(), ec, mopts);

    const auto dir = ensure_outdir(cfg);
    write_text_file((dir / "report.json").string(),
                    convergence_report_json(report).dump(2) + "\n");

    std::printf("%-10s", "N");
    for (double tc : checkpoints) std::printf(" dist@t=%-8.4g", tc);
    std::printf("\n");
    for (std::size_t i = 0; i < report.n_list.size(); ++i) {
        std::printf("%-10d", report.n_list[i]);
        for (double d : report.trace_distances[i]) std::printf(" %-14.6g", d);
        std::printf("\n");
    }
    std::printf("fitted slope %.4f (band [%.2f, %.2f]) -> %s\n",
                report.fitted_slope, report.slope_band_lo, report.slope_band_hi,
                report.slope_in_band ? "PASS" : "FAIL");
    std::cout << "wrote " << (dir / "report.json").string() << "\n";
    return report.slope_in_band ? 0 : 1;
}

inline int cmd_demo_detector(const RunConfig& cfg) {
    const double kappa = cfg.model_params.value("kappa", 1.0);
    const int n = cfg.n_given ? cfg.n() : 10000;
    auto fx = fixtures::standard_detector(kappa);

    EngineConfig ec = engine_config(cfg, false);
    if (!cfg.base_step_given) ec.base_step = 0.1;  // flow is exact in h
    const auto records =
        run_ensemble(fx.model, fx.initial, 0.0, fx.horizon, cfg.master_seed, n,
                     cfg.effective_jobs(), ec);

    std::vector<CheckRow> rows;
    for (double tc : fx.checkpoints) {
        std::size_t detected = 0;
        for (const auto& r : records) {
            if (!r.events.empty() && r.events.front().time <= tc) ++detected;
        }
        const double expected = detection_prob_closed_form(fx.spec, fx.psi0, tc);
        const double observed =
            static_cast<double>(detected) / static_cast<double>(n);
        CheckRow row;
        char label[64];
        std::snprintf(label, sizeof(label), "p(detect by t=%.1f), kappa=%.2g",
                      tc, kappa);
        row.label = label;
        row.observed = observed;
        row.expected = expected;
        row.bound = binomial_4sigma(expected, static_cast<std::size_t>(n));
        row.pass = std::abs(observed - expected) <= row.bound;
        rows.push_back(row);
    }
    const bool ok = print_check_table(rows);
    std::printf("demo detector: %s (n=%d, seed=%llu)\n", ok ? "PASS" : "FAIL",
                n, static_cast<unsigned long long>(cfg.master_seed));
    return ok ? 0 : 1;
}

inline int cmd_demo_clock(const RunConfig& cfg) {
    const double kappa = cfg.model_params.value("kappa", 2.0);
    const double horizon = cfg.t_end_given ? cfg.t_end : 10.0;
    const int n = cfg.n_given ? cfg.n() : 10000;
    auto fx = fixtures::standard_clock(kappa, horizon);

    const EngineConfig ec = engine_config(cfg, false);
    const auto records = run_ensemble(fx.model, fx.initial, 0.0, horizon,
                                      cfg.master_seed, n, cfg.effective_jobs(),
                                      ec);

    // First inter-tick interval per trajectory is exactly Exp(kappa);
    // censoring at the horizon is negligible by construction.
    std::vector<double> first_gaps;
    std::vector<double> counts;
    double max_tick_norm_dev = 0.0;
    const double root_kappa = std::sqrt(kappa);
    for (const auto& r : records) {
        if (!r.events.empty()) first_gaps.push_back(r.events.front().time);
        counts.push_back(static_cast<double>(r.events.size()));
        for (const auto& ev : r.events) {
            max_tick_norm_dev = std::max(
                max_tick_norm_dev, std::abs(ev.jump_gain / root_kappa - 1.0));
        }
    }
    const KsResult ks = ks_test(first_gaps, [kappa](double x) {
        return exponential_cdf(x, kappa);
    });

    const double mu = kappa * horizon;
    std::vector<CheckRow> rows;
    rows.push_back({"KS p-value, first gap vs Exp", ks.p_value, 0.01, 0.0,
                    ks.p_value >= 0.01});
    const double mean_count = mean(counts);
    rows.push_back({"tick count mean", mean_count, mu,
                    4.0 * std::sqrt(mu / n),
                    std::abs(mean_count - mu) <= 4.0 * std::sqrt(mu / n)});
    const double var_count = sample_variance(counts);
    const double var_bound = 4.0 * std::sqrt((mu + 2.0 * mu * mu) / n);
    rows.push_back({"tick count variance", var_count, mu, var_bound,
                    std::abs(var_count - mu) <= var_bound});
    rows.push_back({"max post-tick norm deviation", max_tick_norm_dev, 0.0,
                    1e-12, max_tick_norm_dev <= 1e-12});

    const bool ok = print_check_table(rows);
    std::printf("demo clock: %s (kappa=%.3g, horizon=%.3g, n=%d, seed=%llu)\n",
                ok ? "PASS" : "FAIL", kappa, horizon, n,
                static_cast<unsigned long long>(cfg.master_seed));
    return ok ? 0 : 1;
}

}  // namespace detail

/// Dispatch a validated configuration. Exit codes: 0 pass, 1 check failure,
/// 2 usage (raised as UsageError), 3 numerical abort (other Error types).
inline int execute(const RunConfig& cfg) {
    if (cfg.command == "simulate") return detail::cmd_simulate(cfg);
    if (cfg.command == "integrate") return detail::cmd_integrate(cfg);
    if (cfg.command == "verify") return detail::cmd_verify(cfg);
    if (cfg.command == "demo") {
        return cfg.demo_target == "detector" ? detail::cmd_demo_detector(cfg)
                                             : detail::cmd_demo_clock(cfg);
    }
    throw UsageError("unknown command '" + cfg.command + "'");
}

inline int run_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    std::map<std::string, std::string> env;
    if (const char* seed_env = std::getenv("EVENTUM_SEED")) {
        env["EVENTUM_SEED"] = seed_env;
    }
    try {
        const RunConfig cfg = parse_and_validate(args, env);
        return execute(cfg);
    } catch (const CLI::CallForHelp&) {
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace eventum
