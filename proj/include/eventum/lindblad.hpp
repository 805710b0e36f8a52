// lindblad.hpp — ensemble-level master equation for the density family
//
// The statistical state of the hybrid system is a family (rho_b) of positive
// blocks, one per classical label, with total trace 1. It evolves by
//   d rho_b/dt = -i[H_b, rho_b] + sum_{g != b} g_{bg} rho_g g_{bg}†
//                - 1/2 {L_b, rho_b},
// the unique ensemble law matching the trajectory process. Fixed-step RK4
// keeps golden outputs reproducible; blocks are re-Hermitized after each
// step while positivity is monitored, not projected.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eventum/errors.hpp"
#include "eventum/linalg.hpp"
#include "eventum/model.hpp"

namespace eventum {

struct DensityFamily {
    std::vector<Matrix> blocks;
    double t = 0.0;

    double total_trace() const {
        double tr = 0.0;
        for (const auto& b : blocks) tr += b.trace().real();
        return tr;
    }

    double block_trace(int beta) const {
        return blocks[static_cast<std::size_t>(beta)].trace().real();
    }

    double block_purity(int beta) const {
        const Matrix& b = blocks[static_cast<std::size_t>(beta)];
        return (b * b).trace().real();
    }
};

/// Family concentrated in one block as the projector |psi><psi|.
inline DensityFamily make_pure_family(const HybridModel& model,
                                      const PureHybridState& state) {
    DensityFamily family;
    family.blocks.reserve(static_cast<std::size_t>(model.num_states()));
    for (int b = 0; b < model.num_states(); ++b) {
        family.blocks.emplace_back(Matrix::Zero(model.dim(b), model.dim(b)));
    }
    const Vector psi = state.normalized_copy().psi;
    family.blocks[static_cast<std::size_t>(state.alpha)] = psi * psi.adjoint();
    return family;
}

inline void check_family_shapes(const HybridModel& model,
                                const DensityFamily& family) {
    if (static_cast<int>(family.blocks.size()) != model.num_states()) {
        throw ShapeMismatch("density family has " +
                            std::to_string(family.blocks.size()) +
                            " blocks, model has " +
                            std::to_string(model.num_states()));
    }
    for (int b = 0; b < model.num_states(); ++b) {
        const auto& blk = family.blocks[static_cast<std::size_t>(b)];
        if (blk.rows() != model.dim(b) || blk.cols() != model.dim(b)) {
            throw ShapeMismatch("density block " + std::to_string(b) +
                                " has wrong shape");
        }
    }
}

/// Invariant check: Hermitian blocks, near-positive spectrum, total trace 1.
inline void validate_family(const HybridModel& model,
                            const DensityFamily& family,
                            double hermiticity_tol = 1e-10,
                            double psd_tol = 1e-9, double trace_tol = 1e-8) {
    check_family_shapes(model, family);
    for (int b = 0; b < model.num_states(); ++b) {
        const auto& blk = family.blocks[static_cast<std::size_t>(b)];
        if (hermiticity_defect(blk) > hermiticity_tol) {
            throw ToleranceBreach("density block " + std::to_string(b) +
                                  " is not Hermitian");
        }
        if (min_eigenvalue(blk) < -psd_tol) {
            throw ToleranceBreach("density block " + std::to_string(b) +
                                  " has negative eigenvalue");
        }
    }
    if (std::abs(family.total_trace() - 1.0) > trace_tol) {
        throw ToleranceBreach("density family trace deviates from 1 by " +
                              std::to_string(family.total_trace() - 1.0));
    }
}

/// Blockwise right-hand side: commutator + channel gain - anticommutator
/// loss. The gain and loss terms cancel in total trace.
inline std::vector<Matrix> master_rhs(const HybridModel& model,
                                      const DensityFamily& family, double t) {
    check_family_shapes(model, family);
    const int m = model.num_states();
    std::vector<Matrix> rhs;
    rhs.reserve(static_cast<std::size_t>(m));
    const Complex mi(0.0, -1.0);
    for (int b = 0; b < m; ++b) {
        const Matrix& rho = family.blocks[static_cast<std::size_t>(b)];
        const Matrix h = model.hamiltonian(b, t);
        const Matrix lambda = model.lambda_op(b, t);
        Matrix d = mi * (h * rho - rho * h);
        d -= 0.5 * (lambda * rho + rho * lambda);
        for (int g = 0; g < m; ++g) {
            if (g == b || !model.has_coupling(b, g)) continue;
            const Matrix gm = model.coupling(b, g, t);
            d += gm * family.blocks[static_cast<std::size_t>(g)] * gm.adjoint();
        }
        rhs.push_back(std::move(d));
    }
    return rhs;
}

struct IntegrationOptions {
    double dt = 0.0;        // 0 selects default_master_dt(model)
    int save_stride = 0;    // 0 keeps first and last snapshot only
    double trace_tol = 1e-6;
};

/// Default step: 1e-3 scaled down by the damping strength (max row sum of
/// L_a at t = 0).
inline double default_master_dt(const HybridModel& model) {
    double scale = 1.0;
    for (int a = 0; a < model.num_states(); ++a) {
        const Matrix lambda = model.lambda_op(a, 0.0);
        const double row_sum = lambda.cwiseAbs().rowwise().sum().maxCoeff();
        scale = std::max(scale, row_sum);
    }
    return 1e-3 / scale;
}

namespace detail {

inline void rk4_family_step(const HybridModel& model, DensityFamily& family,
                            double h) {
    const double t = family.t;
    const std::vector<Matrix> k1 = master_rhs(model, family, t);

    DensityFamily stage = family;
    const int m = model.num_states();
    for (int b = 0; b < m; ++b) stage.blocks[b] = family.blocks[b] + (0.5 * h) * k1[b];
    stage.t = t + 0.5 * h;
    const std::vector<Matrix> k2 = master_rhs(model, stage, stage.t);

    for (int b = 0; b < m; ++b) stage.blocks[b] = family.blocks[b] + (0.5 * h) * k2[b];
    const std::vector<Matrix> k3 = master_rhs(model, stage, stage.t);

    for (int b = 0; b < m; ++b) stage.blocks[b] = family.blocks[b] + h * k3[b];
    stage.t = t + h;
    const std::vector<Matrix> k4 = master_rhs(model, stage, stage.t);

    for (int b = 0; b < m; ++b) {
        family.blocks[b] +=
            (h / 6.0) * (k1[b] + 2.0 * k2[b] + 2.0 * k3[b] + k4[b]);
        family.blocks[b] = hermitize(family.blocks[b]);
    }
    family.t = t + h;
}

}  // namespace detail

/// Advance the family to t_target with fixed steps (final step shortened to
/// land exactly). Aborts with ToleranceBreach when the total trace drifts.
inline DensityFamily integrate_to(const HybridModel& model,
                                  DensityFamily family, double t_target,
                                  const IntegrationOptions& opts = {}) {
    check_family_shapes(model, family);
    const double dt = opts.dt > 0.0 ? opts.dt : default_master_dt(model);
    while (family.t < t_target) {
        const double h = std::min(dt, t_target - family.t);
        if (family.t + h <= family.t) break;  // below fp resolution
        detail::rk4_family_step(model, family, h);
        const double drift = std::abs(family.total_trace() - 1.0);
        if (drift > opts.trace_tol) {
            throw ToleranceBreach(
                "total trace drifted by " + std::to_string(drift) + " at t = " +
                std::to_string(family.t) + "; retry with dt = " +
                std::to_string(0.5 * dt));
        }
    }
    return family;
}

/// Time series over [family.t, t_end]; snapshots every save_stride steps.
inline std::vector<DensityFamily> integrate(const HybridModel& model,
                                            DensityFamily family, double t_end,
                                            const IntegrationOptions& opts = {}) {
    check_family_shapes(model, family);
    const double dt = opts.dt > 0.0 ? opts.dt : default_master_dt(model);
    std::vector<DensityFamily> series;
    series.push_back(family);
    long step = 0;
    while (family.t < t_end) {
        const double h = std::min(dt, t_end - family.t);
        if (family.t + h <= family.t) break;
        detail::rk4_family_step(model, family, h);
        const double drift = std::abs(family.total_trace() - 1.0);
        if (drift > opts.trace_tol) {
            throw ToleranceBreach(
                "total trace drifted by " + std::to_string(drift) + " at t = " +
                std::to_string(family.t) + "; retry with dt = " +
                std::to_string(0.5 * dt));
        }
        ++step;
        if (opts.save_stride > 0 && step % opts.save_stride == 0) {
            series.push_back(family);
        }
    }
    if (series.back().t != family.t) series.push_back(family);
    return series;
}

/// Families at the given ascending checkpoint times.
inline std::vector<DensityFamily> integrate_checkpoints(
    const HybridModel& model, DensityFamily family,
    const std::vector<double>& checkpoints, const IntegrationOptions& opts = {}) {
    std::vector<DensityFamily> out;
    out.reserve(checkpoints.size());
    for (double tc : checkpoints) {
        if (tc < family.t) throw Error("integrate_checkpoints: non-ascending");
        family = integrate_to(model, std::move(family), tc, opts);
        out.push_back(family);
    }
    return out;
}

/// Sum over blocks; defined only when every channel shares one Hilbert space.
inline Matrix reduce_to_quantum(const HybridModel& model,
                                const DensityFamily& family) {
    check_family_shapes(model, family);
    const int d = model.dim(0);
    for (int b = 1; b < model.num_states(); ++b) {
        if (model.dim(b) != d) {
            throw DimMismatch("reduce_to_quantum: blocks have unequal dims");
        }
    }
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& blk : family.blocks) sum += blk;
    return sum;
}

struct CollapsibilityReport {
    bool collapsible = false;
    double hamiltonian_deviation = 0.0;
    double lambda_deviation = 0.0;
    double channel_deviation = 0.0;
    double max_deviation = 0.0;
};

/// Checks whether the family-level equation collapses onto a single-space
/// Liouville equation with the candidate jump family {V_i}: identical H_b,
/// identical L_b, and channel action sum_b g_{bg} E g_{bg}† == sum_i V_i E V_i†
/// on a basis of matrix units E.
inline CollapsibilityReport check_collapsibility(
    const HybridModel& model, const std::vector<Matrix>& candidate_v,
    double tol, double t = 0.0) {
    const int m = model.num_states();
    const int d = model.dim(0);
    for (int b = 1; b < m; ++b) {
        if (model.dim(b) != d) {
            throw DimMismatch("check_collapsibility: unequal Hilbert dims");
        }
    }
    for (const auto& v : candidate_v) {
        if (v.rows() != d || v.cols() != d) {
            throw ShapeMismatch("check_collapsibility: candidate V shape");
        }
    }

    CollapsibilityReport report;
    const Matrix h0 = model.hamiltonian(0, t);
    const Matrix l0 = model.lambda_op(0, t);
    for (int b = 1; b < m; ++b) {
        report.hamiltonian_deviation = std::max(
            report.hamiltonian_deviation, max_abs(model.hamiltonian(b, t) - h0));
        report.lambda_deviation = std::max(
            report.lambda_deviation, max_abs(model.lambda_op(b, t) - l0));
    }

    for (int g = 0; g < m; ++g) {
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                Matrix unit = Matrix::Zero(d, d);
                unit(j, k) = 1.0;
                Matrix lhs = Matrix::Zero(d, d);
                for (int b = 0; b < m; ++b) {
                    if (b == g || !model.has_coupling(b, g)) continue;
                    const Matrix gm = model.coupling(b, g, t);
                    lhs += gm * unit * gm.adjoint();
                }
                Matrix rhs = Matrix::Zero(d, d);
                for (const auto& v : candidate_v) rhs += v * unit * v.adjoint();
                report.channel_deviation =
                    std::max(report.channel_deviation, max_abs(lhs - rhs));
            }
        }
    }
    report.max_deviation =
        std::max({report.hamiltonian_deviation, report.lambda_deviation,
                  report.channel_deviation});
    report.collapsible = report.max_deviation <= tol;
    return report;
}

}  // namespace eventum
