// acceptance_main.cpp — the verification gate.
//
// Each criterion prints exactly one PASS/FAIL line. Run all with no
// arguments, or a subset by number: `eventum_acceptance 3 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eventum/ensemble.hpp"
#include "eventum/fixtures.hpp"
#include "eventum/io.hpp"
#include "eventum/lindblad.hpp"
#include "eventum/models.hpp"
#include "eventum/pdp.hpp"
#include "eventum/random_models.hpp"
#include "eventum/stats.hpp"

using namespace eventum;

namespace {

namespace fs = std::filesystem;

int jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 2;
}

// --- 1. Detector closed form ------------------------------------------------

bool detector_closed_form(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const int n = 10000;
    bool pass = true;
    double worst_pull = 0.0;
    for (double kappa : {0.5, 1.0, 2.0}) {
        const auto fx = fixtures::standard_detector(kappa);
        EngineConfig cfg;
        cfg.base_step = 0.1;  // the detector flow is exact in the step size
        cfg.record_states = false;
        const auto records = run_ensemble(fx.model, fx.initial, 0.0, fx.horizon,
                                          9000 + static_cast<std::uint64_t>(
                                                     kappa * 10),
                                          n, jobs(), cfg);
        for (double tc : fx.checkpoints) {
            std::size_t detected = 0;
            for (const auto& r : records) {
                if (!r.events.empty() && r.events.front().time <= tc) ++detected;
            }
            const double observed = static_cast<double>(detected) / n;
            const double expected =
                detection_prob_closed_form(fx.spec, fx.psi0, tc);
            const double bound = binomial_4sigma(expected, n);
            worst_pull = std::max(worst_pull,
                                  std::abs(observed - expected) /
                                      std::max(bound, 1e-30));
            if (std::abs(observed - expected) > bound) pass = false;
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "kappa in {0.5,1,2}, 5 checkpoints, n=%d; worst |dev|/4sigma "
                  "= %.2f; %.1fs (target 120s)",
                  n, worst_pull, secs);
    detail = buf;
    return pass && secs < 120.0;
}

// --- 2. Born-rule limit -----------------------------------------------------

bool born_limit(std::string& detail) {
    const auto fx = fixtures::born_detector(1.0);
    const double dt = 1e-3;
    const Vector psi_dt = fx.model.flow(0, fx.psi0, 0.0, dt);
    const double p = 1.0 - psi_dt.squaredNorm();
    const double born =
        fx.spec.kappa * packet_density_at(fx.spec.grid, fx.psi0, fx.spec.a) * dt;
    const double rel = std::abs(p - born) / born;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "p(dt=1e-3)=%.6e vs kappa|psi(a)|^2 dt=%.6e; rel err %.3f%% "
                  "(limit 5%%)",
                  p, born, 100.0 * rel);
    detail = buf;
    return rel <= 0.05;
}

// --- 3. Fuzzy clock law -----------------------------------------------------

bool clock_law(std::string& detail) {
    const double kappa = 2.0;
    const double horizon = 10.0;
    const int n = 10000;
    auto fx = fixtures::standard_clock(kappa, horizon);
    EngineConfig cfg;
    cfg.record_states = false;
    const auto records = run_ensemble(fx.model, fx.initial, 0.0, horizon, 777,
                                      n, jobs(), cfg);

    std::vector<double> first_gaps;
    std::vector<double> counts;
    double max_norm_dev = 0.0;
    const double root_kappa = std::sqrt(kappa);
    for (const auto& r : records) {
        if (!r.events.empty()) first_gaps.push_back(r.events.front().time);
        counts.push_back(static_cast<double>(r.events.size()));
        for (const auto& ev : r.events) {
            max_norm_dev = std::max(max_norm_dev,
                                    std::abs(ev.jump_gain / root_kappa - 1.0));
        }
    }
    const auto ks = ks_test(first_gaps, [kappa](double x) {
        return exponential_cdf(x, kappa);
    });
    const double mu = kappa * horizon;
    const double mean_count = mean(counts);
    const double mean_bound = 4.0 * std::sqrt(mu / n);
    const double var_count = sample_variance(counts);
    const double var_bound = 4.0 * std::sqrt((mu + 2.0 * mu * mu) / n);

    const bool pass = ks.p_value >= 0.01 &&
                      std::abs(mean_count - mu) <= mean_bound &&
                      std::abs(var_count - mu) <= var_bound &&
                      max_norm_dev <= 1e-12;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "KS p=%.4f (>=0.01); mean %.3f vs %.1f (4s=%.3f); var %.3f "
                  "(4s=%.3f); max tick norm dev %.1e (<=1e-12)",
                  ks.p_value, mean_count, mu, mean_bound, var_count, var_bound,
                  max_norm_dev);
    detail = buf;
    return pass;
}

// --- 4. Ensemble vs master equation ----------------------------------------

bool theorem_agreement(std::string& detail) {
    const HybridModel model = build_testpair_model();
    const PureHybridState initial = fixtures::ground_initial(model);
    const std::vector<double> checkpoints = {0.5, 1.0, 2.0};
    const std::vector<int> n_list = {100, 1000, 10000};
    const auto report = convergence_report(model, initial, 0.0, checkpoints,
                                           n_list, {501, 502, 503}, jobs());

    const double bound = 5.0 / std::sqrt(10000.0) + 2e-3;
    double worst = 0.0;
    for (double d : report.trace_distances.back()) worst = std::max(worst, d);
    const bool pass = worst <= bound && report.slope_in_band;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max distance at N=1e4: %.4f (<= %.4f); slope %.3f in "
                  "[-0.65,-0.35]",
                  worst, bound, report.fitted_slope);
    detail = buf;
    return pass;
}

// --- 5. Survival identity ---------------------------------------------------

bool survival_identity(std::string& detail) {
    const HybridModel model = build_testpair_model();
    const PureHybridState initial = fixtures::ground_initial(model);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
    const double dev = survival_identity_check(model, initial, grid);
    char buf[100];
    std::snprintf(buf, sizeof(buf), "max |exp(-int lambda) - |psi|^2| = %.2e "
                                    "(<= 1e-6)",
                  dev);
    detail = buf;
    return dev <= 1e-6;
}

// --- 6. Conservation suite --------------------------------------------------

bool conservation_suite(std::string& detail) {
    // Master integration keeps total trace within 1e-8 over [0, 10].
    double worst_trace = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const HybridModel model = build_random_model(8700 + s, 2, {2, 2});
        RngStream rng(10 + s, 0);
        DensityFamily family = make_pure_family(
            model, {0, random_unit_vector(rng, 2), true});
        IntegrationOptions opts;
        opts.save_stride = 200;
        const auto series = integrate(model, std::move(family), 10.0, opts);
        for (const auto& snap : series) {
            worst_trace = std::max(worst_trace,
                                   std::abs(snap.total_trace() - 1.0));
        }
    }

    // Flow steps never grow the norm beyond 1e-9 relative.
    bool norm_ok = true;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const HybridModel model = build_random_model(8800 + s, 2, {3, 3});
        RngStream rng(20 + s, 0);
        Vector psi = random_unit_vector(rng, 3);
        double t = 0.0;
        for (int k = 0; k < 400; ++k) {
            const Vector next =
                propagate_step(model, {0, psi, false}, t, 0.01);
            if (next.norm() > psi.norm() * (1.0 + 1e-9)) norm_ok = false;
            psi = next;
            t += 0.01;
        }
    }

    // Channel distributions sum to 1 within 1e-10 on 1000 random draws.
    double worst_sum = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const HybridModel model = build_random_model(9000 + s, 3, {2, 2, 2});
        RngStream rng(30 + s, 0);
        for (int k = 0; k < 10; ++k) {
            const int a = static_cast<int>(rng.next_u64() % 3);
            const Vector psi = random_unit_vector(rng, 2);
            const auto probs = model.jump_probs(a, psi, 0.0);
            double total = 0.0;
            for (double p : probs) total += p;
            worst_sum = std::max(worst_sum, std::abs(total - 1.0));
        }
    }

    const bool pass = worst_trace <= 1e-8 && norm_ok && worst_sum <= 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max trace drift %.1e (<=1e-8); norm monotone: %s; max "
                  "|sum p - 1| %.1e (<=1e-10, 1000 draws)",
                  worst_trace, norm_ok ? "yes" : "NO", worst_sum);
    detail = buf;
    return pass;
}

// --- 7. Sampler equivalence -------------------------------------------------

bool sampler_equivalence(std::string& detail) {
    const HybridModel model = build_testtriple_model();
    const PureHybridState initial = fixtures::ground_initial(model);
    const double horizon = 6.0;
    const int n = 10000;
    EngineConfig cfg;
    cfg.record_states = false;

    const auto norm_recs = run_ensemble(model, initial, 0.0, horizon, 4001, n,
                                        jobs(), cfg);
    const auto thin_recs =
        run_ensemble(model, initial, 0.0, horizon, 4002, n, jobs(), cfg,
                     SamplerKind::Thinning, 1e-3);

    std::vector<double> t_norm, t_thin;
    std::vector<std::size_t> ch_norm(3, 0), ch_thin(3, 0);
    for (const auto& r : norm_recs) {
        if (r.events.empty()) continue;
        t_norm.push_back(r.events.front().time);
        ch_norm[static_cast<std::size_t>(r.events.front().to_state)]++;
    }
    for (const auto& r : thin_recs) {
        if (r.events.empty()) continue;
        t_thin.push_back(r.events.front().time);
        ch_thin[static_cast<std::size_t>(r.events.front().to_state)]++;
    }
    const auto ks = ks_test_two_sample(t_norm, t_thin);

    bool channels_ok = true;
    double worst_chan_pull = 0.0;
    for (int b = 0; b < 3; ++b) {
        const double n1 = static_cast<double>(t_norm.size());
        const double n2 = static_cast<double>(t_thin.size());
        const double f1 = ch_norm[static_cast<std::size_t>(b)] / n1;
        const double f2 = ch_thin[static_cast<std::size_t>(b)] / n2;
        const double pooled = (ch_norm[b] + ch_thin[b]) / (n1 + n2);
        const double bound =
            4.0 * std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
        if (pooled == 0.0) continue;
        worst_chan_pull =
            std::max(worst_chan_pull, std::abs(f1 - f2) / std::max(bound, 1e-30));
        if (std::abs(f1 - f2) > bound) channels_ok = false;
    }

    const bool pass = ks.p_value >= 0.01 && channels_ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "first-event KS p=%.4f (>=0.01, n=%zu/%zu); worst channel "
                  "|df|/4sigma=%.2f",
                  ks.p_value, t_norm.size(), t_thin.size(), worst_chan_pull);
    detail = buf;
    return pass;
}

// --- 8. Reproducibility through the CLI -------------------------------------

#ifndef EVENTUM_CLI_PATH
#define EVENTUM_CLI_PATH "eventum"
#endif

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool reproducibility(std::string& detail) {
    const fs::path base = fs::temp_directory_path() / "eventum_acceptance";
    fs::remove_all(base);
    const std::string cmd_base =
        std::string(EVENTUM_CLI_PATH) +
        " simulate --model clock --kappa 2 --t-end 3 --n 300 --seed 20260810";
    struct Run {
        const char* dir;
        const char* jobs;
    };
    for (const Run r : {Run{"a", "1"}, Run{"b", "1"}, Run{"c", "8"}}) {
        const fs::path out = base / r.dir;
        fs::create_directories(out);
        const std::string cmd = cmd_base + " --jobs " + r.jobs + " --out " +
                                out.string() + " >/dev/null";
        if (std::system(cmd.c_str()) != 0) {
            detail = "CLI run failed";
            return false;
        }
    }
    const std::string ev_a = slurp(base / "a" / "events.jsonl");
    const std::string ev_b = slurp(base / "b" / "events.jsonl");
    const std::string ev_c = slurp(base / "c" / "events.jsonl");
    const std::string sm_a = slurp(base / "a" / "summary.csv");
    const std::string sm_c = slurp(base / "c" / "summary.csv");
    const bool pass = !ev_a.empty() && ev_a == ev_b && ev_a == ev_c &&
                      sm_a == sm_c;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "event log %zu bytes; rerun identical: %s; jobs 1 vs 8 "
                  "identical: %s",
                  ev_a.size(), ev_a == ev_b ? "yes" : "NO",
                  ev_a == ev_c ? "yes" : "NO");
    detail = buf;
    return pass;
}

struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "detector closed-form detection probability", detector_closed_form},
        {2, "Born-rule short-exposure limit", born_limit},
        {3, "fuzzy clock Poisson law", clock_law},
        {4, "ensemble estimate matches master equation", theorem_agreement},
        {5, "survival-probability identity", survival_identity},
        {6, "conservation suite", conservation_suite},
        {7, "norm-threshold vs thinning sampler", sampler_equivalence},
        {8, "seeded reproducibility through the CLI", reproducibility},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    bool all_pass = true;
    for (const auto& c : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
            continue;
        }
        std::string detail;
        bool pass = false;
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%d] %-46s %s  (%s)\n", c.id, c.title,
                    pass ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && pass;
    }
    return all_pass ? 0 : 1;
}
