// pdp.hpp — piecewise deterministic trajectory engine
//
// One trajectory alternates deterministic non-unitary flow segments with
// instantaneous jumps:
//   1. draw r uniform in (0,1);
//   2. propagate d psi/dt = (-iH_a - L_a/2) psi until |psi(t1)|^2 = r;
//   3. draw r1, pick the first channel whose cumulative weight reaches r1;
//   4. jump psi -> g psi / |g psi|, relabel, repeat until the horizon.
// A thinning sampler (per-step Bernoulli decisions with probability
// lambda*dt) is provided as an independent route to the same statistics.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eventum/errors.hpp"
#include "eventum/linalg.hpp"
#include "eventum/model.hpp"
#include "eventum/rng.hpp"

namespace eventum {

struct EngineConfig {
    double base_step = 1e-2;        // outer propagation step
    double root_tol = 1e-10;        // |norm^2 - r| at the located event
    int max_bisect_iters = 60;
    int max_step_halvings = 40;
    double norm_growth_tol = 1e-9;  // per-step relative norm growth allowance
    bool record_states = true;      // keep post-jump/final vectors in records
};

struct EventRecord {
    double time = 0.0;
    int from_state = 0;
    int to_state = 0;
    /// |psi(t1)|^2 just before the jump; equals the drawn r up to root_tol.
    double pre_jump_norm_sq = 0.0;
    /// |g psi_hat| for the normalized pre-jump state; sqrt(kappa) times the
    /// isometry defect for clock-type channels.
    double jump_gain = 0.0;
    Vector post_jump_psi;  // normalized; empty when record_states is false
};

struct TrajectoryRecord {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
    PureHybridState initial;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<EventRecord> events;
    PureHybridState final_state;  // normalized for reporting
    /// |psi|^2 of the last flow segment at the horizon (1 when the
    /// trajectory ended exactly on an event).
    double final_survival_norm_sq = 1.0;
    bool terminated_without_event = true;
};

namespace detail {

inline Vector rk4_step(const HybridModel& model, int alpha, const Vector& psi,
                       double t, double h) {
    if (model.time_dependent()) {
        const Matrix a1 = model.generator(alpha, t);
        const Matrix a2 = model.generator(alpha, t + 0.5 * h);
        const Matrix a4 = model.generator(alpha, t + h);
        const Vector k1 = a1 * psi;
        const Vector k2 = a2 * (psi + (0.5 * h) * k1);
        const Vector k3 = a2 * (psi + (0.5 * h) * k2);
        const Vector k4 = a4 * (psi + h * k3);
        return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const Matrix gen = model.generator(alpha, t);
    const Vector k1 = gen * psi;
    const Vector k2 = gen * (psi + (0.5 * h) * k1);
    const Vector k3 = gen * (psi + (0.5 * h) * k2);
    const Vector k4 = gen * (psi + h * k3);
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Advance by at most h, halving on norm growth; returns the step actually
/// taken. Exact model flows are taken as-is.
inline std::pair<Vector, double> advance_checked(const HybridModel& model,
                                                 int alpha, const Vector& psi,
                                                 double t, double h,
                                                 const EngineConfig& cfg) {
    if (model.has_flow()) return {model.flow(alpha, psi, t, h), h};
    const double norm_before = psi.norm();
    double step = h;
    for (int attempt = 0; attempt <= cfg.max_step_halvings; ++attempt) {
        Vector candidate = rk4_step(model, alpha, psi, t, step);
        if (candidate.norm() <= norm_before * (1.0 + cfg.norm_growth_tol)) {
            return {std::move(candidate), step};
        }
        step *= 0.5;
    }
    throw RetryCapExceeded("propagation step rejected " +
                           std::to_string(cfg.max_step_halvings + 1) +
                           " times at t = " + std::to_string(t));
}

}  // namespace detail

/// One classical RK4 step of the non-unitary flow. Throws StepRejected when
/// the norm grows beyond tolerance (caller halves and retries).
inline Vector propagate_step(const HybridModel& model,
                             const PureHybridState& state, double t, double h) {
    if (h <= 0.0) throw Error("propagate_step: step must be positive");
    Vector next = detail::rk4_step(model, state.alpha, state.psi, t, h);
    if (next.norm() > state.psi.norm() * (1.0 + 1e-9)) {
        throw StepRejected("norm grew beyond tolerance at t = " +
                           std::to_string(t) + " with h = " +
                           std::to_string(h));
    }
    return next;
}

struct SegmentResult {
    bool event_found = false;
    double t1 = 0.0;
    Vector psi_at_event;   // un-normalized, |psi|^2 == r up to root_tol
    Vector psi_at_horizon; // un-normalized psi(t_max) when no event found
    double norm_sq_at_horizon = 1.0;
};

/// Locate the event time of one flow segment: step until |psi|^2 first
/// brackets r (valid because the norm is non-increasing), then bisect,
/// restarting propagation from the bracket's left endpoint.
inline SegmentResult find_jump_time(const HybridModel& model,
                                    const PureHybridState& state, double t0,
                                    double r, double t_max,
                                    const EngineConfig& cfg = {}) {
    if (r <= 0.0 || r >= 1.0) {
        throw Error("find_jump_time: r must lie in (0,1)");
    }
    const int alpha = state.alpha;
    SegmentResult res;

    Vector psi = state.psi;
    double t = t0;
    if (t >= t_max) {
        res.psi_at_horizon = psi;
        res.norm_sq_at_horizon = psi.squaredNorm();
        return res;
    }

    // A channel with no outgoing couplings has lambda == 0 for every t:
    // the norm stays at 1 and no event can ever fire.
    if (model.couplings_out(alpha).empty()) {
        if (model.has_flow()) {
            psi = model.flow(alpha, psi, t, t_max - t);
        } else {
            while (t < t_max) {
                const double h = std::min(cfg.base_step, t_max - t);
                auto [next, taken] =
                    detail::advance_checked(model, alpha, psi, t, h, cfg);
                psi = std::move(next);
                if (t + taken <= t) break;  // below fp resolution
                t += taken;
            }
        }
        res.psi_at_horizon = std::move(psi);
        res.norm_sq_at_horizon = res.psi_at_horizon.squaredNorm();
        return res;
    }

    double norm_sq = psi.squaredNorm();
    while (t < t_max) {
        const double h = std::min(cfg.base_step, t_max - t);
        auto [next, taken] = detail::advance_checked(model, alpha, psi, t, h, cfg);
        const double norm_sq_next = next.squaredNorm();
        const double t_next = t + taken;
        if (t_next <= t) {  // below fp resolution: treat as horizon
            res.psi_at_horizon = std::move(next);
            res.norm_sq_at_horizon = res.psi_at_horizon.squaredNorm();
            return res;
        }

        if (std::abs(norm_sq_next - r) <= cfg.root_tol) {
            res.event_found = true;
            res.t1 = t_next;
            res.psi_at_event = std::move(next);
            return res;
        }
        if (norm_sq_next < r) {
            // Bracketed in (t, t_next]: bisect on the sub-interval.
            double lo = t;
            double hi = t_next;
            Vector psi_lo = std::move(psi);
            Vector psi_hi = std::move(next);
            double f_hi = norm_sq_next;
            for (int iter = 0; iter < cfg.max_bisect_iters; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;  // interval exhausted in fp
                Vector psi_mid =
                    detail::advance_checked(model, alpha, psi_lo, lo, mid - lo,
                                            cfg)
                        .first;
                const double f_mid = psi_mid.squaredNorm();
                if (std::abs(f_mid - r) <= cfg.root_tol) {
                    res.event_found = true;
                    res.t1 = mid;
                    res.psi_at_event = std::move(psi_mid);
                    return res;
                }
                if (f_mid > r) {
                    lo = mid;
                    psi_lo = std::move(psi_mid);
                } else {
                    hi = mid;
                    psi_hi = std::move(psi_mid);
                    f_hi = f_mid;
                }
            }
            res.event_found = true;
            res.t1 = hi;
            res.psi_at_event = std::move(psi_hi);
            (void)f_hi;
            return res;
        }
        psi = std::move(next);
        norm_sq = norm_sq_next;
        t = t_next;
    }
    (void)norm_sq;
    res.psi_at_horizon = std::move(psi);
    res.norm_sq_at_horizon = res.psi_at_horizon.squaredNorm();
    return res;
}

/// First label (ascending, as the classical states are ordered) at which the
/// cumulative channel weight reaches r1.
inline int select_channel(const std::vector<double>& probs, double r1) {
    if (r1 <= 0.0 || r1 >= 1.0) {
        throw Error("select_channel: r1 must lie in (0,1)");
    }
    double total = 0.0;
    int last_nonzero = -1;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        if (probs[b] < -1e-12) {
            throw InvalidDistribution("negative channel probability at index " +
                                      std::to_string(b));
        }
        total += probs[b];
        if (probs[b] > 0.0) last_nonzero = static_cast<int>(b);
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw InvalidDistribution("channel probabilities sum to " +
                                  std::to_string(total));
    }
    if (last_nonzero < 0) {
        throw InvalidDistribution("all channel probabilities are zero");
    }
    double cumulative = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        cumulative += probs[b];
        if (cumulative >= r1) return static_cast<int>(b);
    }
    // Floating-point shortfall: the running sum never reached r1.
    return last_nonzero;
}

namespace detail {

struct JumpOutcome {
    PureHybridState state;
    double gain = 0.0;  // |g psi_hat|
};

inline JumpOutcome jump_with_gain(const HybridModel& model,
                                  const PureHybridState& state, double t1,
                                  int to) {
    const Vector gpsi = model.apply_coupling(to, state.alpha, state.psi, t1);
    const double gnorm = gpsi.norm();
    if (!(gnorm > 0.0)) {
        throw ZeroPostJumpNorm("jump (" + std::to_string(to) + " <- " +
                               std::to_string(state.alpha) + ") at t = " +
                               std::to_string(t1) +
                               " annihilated the state");
    }
    JumpOutcome out;
    out.state = PureHybridState{to, gpsi / gnorm, true};
    const double pre = state.psi.norm();
    out.gain = pre > 0.0 ? gnorm / pre : 0.0;
    return out;
}

}  // namespace detail

/// psi -> g_{to,alpha} psi / |g psi| with relabeling to `to`.
inline PureHybridState apply_jump(const HybridModel& model,
                                  const PureHybridState& state, double t1,
                                  int to) {
    return detail::jump_with_gain(model, state, t1, to).state;
}

/// Norm-threshold sampler: the 6-step loop over flow segments and jumps.
inline TrajectoryRecord run_trajectory(const HybridModel& model,
                                       const PureHybridState& initial,
                                       double t_start, double t_end,
                                       RngStream& rng,
                                       const EngineConfig& cfg = {}) {
    if (t_end <= t_start) throw Error("run_trajectory: t_end must exceed t_start");
    if (std::abs(initial.norm_sq() - 1.0) > 1e-9) {
        throw Error("run_trajectory: initial state must be normalized");
    }

    TrajectoryRecord rec;
    rec.master_seed = rng.master_seed();
    rec.stream_index = rng.stream_index();
    rec.initial = initial;
    rec.t_start = t_start;
    rec.t_end = t_end;
    if (!cfg.record_states) rec.initial.psi = Vector();

    PureHybridState state = initial;
    double t = t_start;
    for (;;) {
        const double r = rng.next_open01();
        SegmentResult seg = find_jump_time(model, state, t, r, t_end, cfg);
        if (!seg.event_found) {
            rec.final_survival_norm_sq = seg.norm_sq_at_horizon;
            rec.terminated_without_event = true;
            const double n = std::sqrt(seg.norm_sq_at_horizon);
            rec.final_state = PureHybridState{
                state.alpha, n > 0.0 ? Vector(seg.psi_at_horizon / n) : seg.psi_at_horizon,
                true};
            break;
        }

        const double r1 = rng.next_open01();
        const PureHybridState pre_jump{state.alpha, std::move(seg.psi_at_event),
                                       false};
        const std::vector<double> probs =
            model.jump_probs(state.alpha, pre_jump.psi, seg.t1);
        const int to = select_channel(probs, r1);
        auto outcome = detail::jump_with_gain(model, pre_jump, seg.t1, to);

        EventRecord ev;
        ev.time = seg.t1;
        ev.from_state = state.alpha;
        ev.to_state = to;
        ev.pre_jump_norm_sq = pre_jump.psi.squaredNorm();
        ev.jump_gain = outcome.gain;
        if (cfg.record_states) ev.post_jump_psi = outcome.state.psi;
        rec.events.push_back(std::move(ev));

        state = std::move(outcome.state);
        t = seg.t1;
        if (t >= t_end) {
            rec.final_survival_norm_sq = 1.0;
            rec.terminated_without_event = false;
            rec.final_state = state;
            break;
        }
    }
    if (!cfg.record_states) rec.final_state.psi = Vector();
    return rec;
}

namespace detail {
inline std::atomic<bool> thinning_rate_warned{false};
}

/// Thinning sampler: per-step Bernoulli jump decisions with probability
/// lambda*dt on the normalized flow. Independent of the norm-threshold
/// route; both must agree in distribution as dt -> 0.
inline TrajectoryRecord run_trajectory_thinning(const HybridModel& model,
                                                const PureHybridState& initial,
                                                double t_start, double t_end,
                                                RngStream& rng, double dt,
                                                const EngineConfig& cfg = {}) {
    if (t_end <= t_start) {
        throw Error("run_trajectory_thinning: t_end must exceed t_start");
    }
    if (dt <= 0.0) throw Error("run_trajectory_thinning: dt must be positive");

    TrajectoryRecord rec;
    rec.master_seed = rng.master_seed();
    rec.stream_index = rng.stream_index();
    rec.initial = initial;
    rec.t_start = t_start;
    rec.t_end = t_end;
    if (!cfg.record_states) rec.initial.psi = Vector();

    PureHybridState state = initial.normalized_copy();
    double t = t_start;
    double segment_survival = 1.0;

    while (t < t_end) {
        const double h = std::min(dt, t_end - t);
        const double rate = model.jump_rate(state.alpha, state.psi, t);
        if (rate * h > 0.1 &&
            !detail::thinning_rate_warned.exchange(true)) {
            std::cerr << "eventum: thinning step dt gives lambda*dt = "
                      << rate * h << " > 0.1; refine dt\n";
        }
        const bool jump = rate > 0.0 && rng.next_open01() < rate * h;

        auto [next, taken] =
            detail::advance_checked(model, state.alpha, state.psi, t, h, cfg);
        if (t + taken <= t) break;  // below fp resolution
        const double n2 = next.squaredNorm();
        segment_survival *= n2;
        t += taken;
        state.psi = std::move(next);
        state.psi /= std::sqrt(n2);

        if (jump) {
            const double r1 = rng.next_open01();
            const std::vector<double> probs =
                model.jump_probs(state.alpha, state.psi, t);
            const int to = select_channel(probs, r1);
            auto outcome = detail::jump_with_gain(model, state, t, to);

            EventRecord ev;
            ev.time = t;
            ev.from_state = state.alpha;
            ev.to_state = to;
            ev.pre_jump_norm_sq = segment_survival;
            ev.jump_gain = outcome.gain;
            if (cfg.record_states) ev.post_jump_psi = outcome.state.psi;
            rec.events.push_back(std::move(ev));

            state = std::move(outcome.state);
            segment_survival = 1.0;
        }
    }
    rec.terminated_without_event = rec.events.empty() ||
                                   rec.events.back().time < t_end;
    rec.final_survival_norm_sq = segment_survival;
    rec.final_state = state;
    if (!cfg.record_states) rec.final_state.psi = Vector();
    return rec;
}

/// Max deviation over the grid between the two survival-probability routes
/// 1 - exp(-integral of lambda along the normalized flow) and 1 - |psi(t)|^2.
inline double survival_identity_check(const HybridModel& model,
                                      const PureHybridState& initial,
                                      const std::vector<double>& t_grid,
                                      double quad_step = 5e-4,
                                      const EngineConfig& cfg = {}) {
    if (t_grid.size() < 2) throw Error("survival_identity_check: need a grid");
    Vector psi = initial.normalized_copy().psi;
    double t = t_grid.front();
    double integral = 0.0;
    double rate_prev = model.jump_rate(initial.alpha, psi, t);
    double max_dev = 0.0;

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double target = t_grid[k];
        if (target <= t) throw Error("survival_identity_check: grid not ascending");
        while (t < target) {
            const double h = std::min(quad_step, target - t);
            auto [next, taken] =
                detail::advance_checked(model, initial.alpha, psi, t, h, cfg);
            psi = std::move(next);
            if (t + taken <= t) break;  // below fp resolution
            t += taken;
            const Vector psi_hat = psi / psi.norm();
            const double rate = model.jump_rate(initial.alpha, psi_hat, t);
            integral += taken * 0.5 * (rate_prev + rate);
            rate_prev = rate;
        }
        const double dev = std::abs(std::exp(-integral) - psi.squaredNorm());
        max_dev = std::max(max_dev, dev);
    }
    return max_dev;
}

enum class SamplerKind { NormThreshold, Thinning };

/// Run n independent trajectories on stream indices 0..n-1. Results are
/// identical for any worker count; trajectories are embarrassingly parallel
/// over the shared immutable model.
inline std::vector<TrajectoryRecord> run_ensemble(
    const HybridModel& model, const PureHybridState& initial, double t_start,
    double t_end, std::uint64_t master_seed, int n, int jobs,
    const EngineConfig& cfg = {}, SamplerKind kind = SamplerKind::NormThreshold,
    double thinning_dt = 1e-3) {
    if (n < 1) throw Error("run_ensemble: need at least one trajectory");
    jobs = std::max(1, jobs);
    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(n));
    std::atomic<int> next_index{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const int i = next_index.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                RngStream rng(master_seed, static_cast<std::uint64_t>(i));
                records[static_cast<std::size_t>(i)] =
                    kind == SamplerKind::NormThreshold
                        ? run_trajectory(model, initial, t_start, t_end, rng, cfg)
                        : run_trajectory_thinning(model, initial, t_start, t_end,
                                                  rng, thinning_dt, cfg);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error("run_ensemble: trajectory failed: " + first_error);
    return records;
}

}  // namespace eventum
