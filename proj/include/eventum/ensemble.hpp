// ensemble.hpp — Monte Carlo density estimation and master-equation agreement
//
// The empirical density family at time t is the average of rank-1 projectors
// of the reconstructed trajectory states, blocked by classical label. Its
// trace distance to the integrated master equation is the working numerical
// statement of the trajectory <-> ensemble correspondence.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eventum/errors.hpp"
#include "eventum/lindblad.hpp"
#include "eventum/linalg.hpp"
#include "eventum/model.hpp"
#include "eventum/pdp.hpp"
#include "eventum/stats.hpp"

namespace eventum {

struct EnsembleEstimate {
    DensityFamily family;
    int n_trajectories = 0;
    double t = 0.0;
    std::vector<int> per_block_counts;
};

namespace detail {

inline Vector propagate_interval(const HybridModel& model, int alpha,
                                 Vector psi, double t0, double t1,
                                 const EngineConfig& cfg) {
    if (model.has_flow()) {
        if (t1 > t0) return model.flow(alpha, psi, t0, t1 - t0);
        return psi;
    }
    double t = t0;
    while (t < t1) {
        const double h = std::min(cfg.base_step, t1 - t);
        auto [next, taken] = advance_checked(model, alpha, psi, t, h, cfg);
        psi = std::move(next);
        if (t + taken <= t) break;
        t += taken;
    }
    return psi;
}

}  // namespace detail

/// Replay the deterministic flow from the last recorded event before t (the
/// records must have been produced with record_states enabled).
inline PureHybridState reconstruct_state(const HybridModel& model,
                                         const TrajectoryRecord& record,
                                         double t,
                                         const EngineConfig& cfg = {}) {
    if (t < record.t_start || t > record.t_end) {
        throw HorizonExceeded("checkpoint t = " + std::to_string(t) +
                              " outside trajectory span [" +
                              std::to_string(record.t_start) + ", " +
                              std::to_string(record.t_end) + "]");
    }
    int alpha = record.initial.alpha;
    Vector psi = record.initial.psi;
    double t0 = record.t_start;
    for (const auto& ev : record.events) {
        if (ev.time > t) break;
        alpha = ev.to_state;
        psi = ev.post_jump_psi;
        t0 = ev.time;
    }
    if (psi.size() == 0) {
        throw Error("reconstruct_state: records were taken without state "
                    "vectors (record_states = false)");
    }
    psi = detail::propagate_interval(model, alpha, std::move(psi), t0, t, cfg);
    const double n = psi.norm();
    if (n > 0.0) psi /= n;
    return PureHybridState{alpha, std::move(psi), true};
}

/// rho_b(t) = (1/N) sum over trajectories in block b of |psi><psi|. Exactly
/// trace-1, Hermitian, and PSD by construction.
inline EnsembleEstimate estimate_density(
    const std::vector<TrajectoryRecord>& trajectories, const HybridModel& model,
    double t, const EngineConfig& cfg = {}) {
    if (trajectories.empty()) throw Error("estimate_density: no trajectories");
    EnsembleEstimate est;
    est.t = t;
    est.n_trajectories = static_cast<int>(trajectories.size());
    est.per_block_counts.assign(static_cast<std::size_t>(model.num_states()), 0);
    est.family.t = t;
    for (int b = 0; b < model.num_states(); ++b) {
        est.family.blocks.emplace_back(Matrix::Zero(model.dim(b), model.dim(b)));
    }
    const double weight = 1.0 / static_cast<double>(trajectories.size());
    for (const auto& rec : trajectories) {
        const PureHybridState s = reconstruct_state(model, rec, t, cfg);
        est.family.blocks[static_cast<std::size_t>(s.alpha)] +=
            weight * (s.psi * s.psi.adjoint());
        est.per_block_counts[static_cast<std::size_t>(s.alpha)] += 1;
    }
    return est;
}

/// 1/2 sum over blocks of the trace norm of the difference.
inline double trace_distance(const DensityFamily& a, const DensityFamily& b) {
    if (a.blocks.size() != b.blocks.size()) {
        throw ShapeMismatch("trace_distance: block count mismatch");
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        if (a.blocks[i].rows() != b.blocks[i].rows() ||
            a.blocks[i].cols() != b.blocks[i].cols()) {
            throw ShapeMismatch("trace_distance: block shape mismatch");
        }
        dist += 0.5 * trace_norm(a.blocks[i] - b.blocks[i]);
    }
    return dist;
}

struct ConvergenceReport {
    std::vector<double> checkpoints;
    std::vector<int> n_list;
    /// trace_distances[i][k]: distance at checkpoint k with n_list[i] samples.
    std::vector<std::vector<double>> trace_distances;
    double fitted_slope = 0.0;
    bool slope_in_band = false;
    double slope_band_lo = -0.65;
    double slope_band_hi = -0.35;
};

/// Monte Carlo scaling study: estimate at each checkpoint for each N, compare
/// against one master-equation solution, and fit the log-log decay rate of
/// the distance (C/sqrt(N) gives slope -1/2).
inline ConvergenceReport convergence_report(
    const HybridModel& model, const PureHybridState& initial, double t_start,
    const std::vector<double>& checkpoints, const std::vector<int>& n_list,
    const std::vector<std::uint64_t>& seeds, int jobs = 1,
    const EngineConfig& cfg = {}, const IntegrationOptions& master_opts = {}) {
    if (checkpoints.empty()) throw Error("convergence_report: no checkpoints");
    if (n_list.empty()) throw Error("convergence_report: no sample counts");

    ConvergenceReport report;
    report.checkpoints = checkpoints;
    report.n_list = n_list;

    DensityFamily family0 = make_pure_family(model, initial);
    family0.t = t_start;
    const std::vector<DensityFamily> reference =
        integrate_checkpoints(model, std::move(family0), checkpoints, master_opts);

    const double horizon = checkpoints.back();
    EngineConfig run_cfg = cfg;
    run_cfg.record_states = true;

    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const std::uint64_t seed =
            i < seeds.size() ? seeds[i]
                             : (seeds.empty() ? 0x9E37u + i : seeds.back() + i);
        const auto records = run_ensemble(model, initial, t_start, horizon, seed,
                                          n_list[i], jobs, run_cfg);
        std::vector<double> dists;
        dists.reserve(checkpoints.size());
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
            const EnsembleEstimate est =
                estimate_density(records, model, checkpoints[k], run_cfg);
            dists.push_back(trace_distance(est.family, reference[k]));
        }
        report.trace_distances.push_back(std::move(dists));
    }

    std::vector<double> log_n;
    std::vector<double> log_d;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        double mean = 0.0;
        for (double d : report.trace_distances[i]) mean += d;
        mean /= static_cast<double>(checkpoints.size());
        log_n.push_back(std::log(static_cast<double>(n_list[i])));
        log_d.push_back(std::log(std::max(mean, 1e-300)));
    }
    report.fitted_slope = fit_slope(log_n, log_d);
    report.slope_in_band = report.fitted_slope >= report.slope_band_lo &&
                           report.fitted_slope <= report.slope_band_hi;
    return report;
}

}  // namespace eventum
