// model.hpp — coupled classical+quantum system description
//
// A hybrid model is a finite classical state set {0..m-1}, one Hilbert space
// C^{dims[a]} per classical state, Hamiltonians H_a(t), and couplings
// g_{ba}(t) : C^{dims[a]} -> C^{dims[b]} for ordered pairs b != a.  From the
// couplings the model derives the damping operator L_a = sum_b g†g, the jump
// rate (psi, L_a psi), and the channel distribution |g_{ba} psi|^2 / rate,
// which drive both the trajectory sampler and the master-equation integrator.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eventum/errors.hpp"
#include "eventum/linalg.hpp"

namespace eventum {

/// Classical labels are zero-based internally; all user-facing I/O is
/// one-based (see io.hpp).
using ClassicalStateId = int;

using OperatorFn = std::function<Matrix(double)>;
using ApplyFn = std::function<Vector(const Vector&, double)>;

/// Deterministic propagator override: advance the un-normalized psi of
/// channel alpha from t to t+h. Models with an exactly solvable flow (the
/// streaming detector) install one; everything else uses the RK4 stepper.
using FlowFn =
    std::function<Vector(int alpha, const Vector& psi, double t, double h)>;

struct CouplingSpec {
    int to = 0;    // beta: target classical state
    int from = 0;  // alpha: source classical state
    OperatorFn matrix;  // g_{to,from}(t), shape dims[to] x dims[from]
    ApplyFn apply;      // optional fast operator action psi -> g psi
};

struct HybridModelSpec {
    int m = 0;
    std::vector<int> dims;
    std::vector<OperatorFn> hamiltonians;  // empty entry means H = 0
    std::vector<CouplingSpec> couplings;
    bool time_dependent = false;
    double hermiticity_tol = 1e-10;
    /// Validation samples; for time-dependent models pass a grid covering
    /// the intended run interval.
    std::vector<double> validation_times = {0.0};
    FlowFn flow;
};

/// One classical label plus the quantum vector living in its Hilbert space.
struct PureHybridState {
    int alpha = 0;
    Vector psi;
    bool normalized = true;

    double norm_sq() const { return psi.squaredNorm(); }

    PureHybridState normalized_copy() const {
        PureHybridState out{alpha, psi, true};
        const double n = psi.norm();
        if (n > 0.0) out.psi /= n;
        return out;
    }
};

struct DetailedBalanceViolation {
    int alpha = 0;
    int beta = 0;
    double defect = 0.0;
};

struct DetailedBalanceReport {
    bool satisfied = true;
    double tolerance = 0.0;
    std::vector<DetailedBalanceViolation> violations;
};

class HybridModel {
public:
    HybridModel() = default;  // empty shell; build via build_model

    int num_states() const { return m_; }
    const std::vector<int>& dims() const { return dims_; }
    int dim(int alpha) const {
        check_alpha(alpha);
        return dims_[static_cast<std::size_t>(alpha)];
    }
    bool time_dependent() const { return time_dependent_; }
    double hermiticity_tol() const { return hermiticity_tol_; }

    Matrix hamiltonian(int alpha, double t) const {
        check_alpha(alpha);
        if (!time_dependent_) return cached_h_[alpha];
        return eval_hamiltonian(alpha, t);
    }

    bool has_coupling(int to, int from) const {
        return coupling_index_.count({to, from}) > 0;
    }

    Matrix coupling(int to, int from, double t) const {
        const auto& c = coupling_at(to, from);
        if (!time_dependent_) return cached_g_[c];
        return couplings_[c].matrix(t);
    }

    Vector apply_coupling(int to, int from, const Vector& psi, double t) const {
        const auto& c = coupling_at(to, from);
        const auto& spec = couplings_[c];
        if (spec.apply) return spec.apply(psi, t);
        if (!time_dependent_) return cached_g_[c] * psi;
        return spec.matrix(t) * psi;
    }

    /// Target labels of the couplings leaving alpha, ascending.
    const std::vector<int>& couplings_out(int alpha) const {
        check_alpha(alpha);
        return out_targets_[static_cast<std::size_t>(alpha)];
    }

    /// Damping operator L_a(t) = sum_b g_{ba}†(t) g_{ba}(t); Hermitian PSD.
    Matrix lambda_op(int alpha, double t) const {
        check_alpha(alpha);
        if (!time_dependent_) return cached_lambda_[alpha];
        return assemble_lambda(alpha, t);
    }

    /// Non-unitary generator -iH_a - L_a/2 of the between-event flow.
    Matrix generator(int alpha, double t) const {
        check_alpha(alpha);
        if (!time_dependent_) return cached_generator_[alpha];
        const Complex mi(0.0, -1.0);
        return mi * eval_hamiltonian(alpha, t) - 0.5 * assemble_lambda(alpha, t);
    }

    /// Instantaneous event rate (psi, L_a psi); psi need not be normalized.
    double jump_rate(int alpha, const Vector& psi, double t) const {
        check_alpha(alpha);
        check_psi_dim(alpha, psi);
        double rate = 0.0;
        if (!time_dependent_) {
            rate = std::real(psi.dot(cached_lambda_[alpha] * psi));
        } else {
            // Same quantity channelwise: sum over |g psi|^2. Avoids dense
            // g†g assembly for structured couplings.
            for (int to : couplings_out(alpha)) {
                rate += apply_coupling(to, alpha, psi, t).squaredNorm();
            }
        }
        if (rate < 0.0 && rate >= -1e-12) rate = 0.0;  // PSD round-off clamp
        return rate;
    }

    /// Channel distribution p_b = |g_{ba} psi|^2 / rate; entry alpha is 0.
    std::vector<double> jump_probs(int alpha, const Vector& psi,
                                   double t) const {
        check_alpha(alpha);
        check_psi_dim(alpha, psi);
        std::vector<double> weights(static_cast<std::size_t>(m_), 0.0);
        double total = 0.0;
        for (int to : couplings_out(alpha)) {
            const double w = apply_coupling(to, alpha, psi, t).squaredNorm();
            weights[static_cast<std::size_t>(to)] = w;
            total += w;
        }
        if (total <= 0.0) {
            throw ZeroRate("jump_probs: zero jump rate (dark state) for label " +
                           std::to_string(alpha));
        }
        const double rate = jump_rate(alpha, psi, t);
        const double denom = rate > 0.0 ? rate : total;
        for (double& w : weights) w /= denom;
        return weights;
    }

    bool has_flow() const { return static_cast<bool>(flow_); }

    Vector flow(int alpha, const Vector& psi, double t, double h) const {
        return flow_(alpha, psi, t, h);
    }

    /// Diagnostic only: the engine never requires g_{ab}† = g_{ba}.
    DetailedBalanceReport check_detailed_balance(double t, double tol) const {
        DetailedBalanceReport report;
        report.tolerance = tol;
        for (int a = 0; a < m_; ++a) {
            for (int b = a + 1; b < m_; ++b) {
                const Matrix gab = has_coupling(a, b)
                                       ? coupling(a, b, t)
                                       : Matrix::Zero(dims_[a], dims_[b]);
                const Matrix gba = has_coupling(b, a)
                                       ? coupling(b, a, t)
                                       : Matrix::Zero(dims_[b], dims_[a]);
                const double defect = max_abs(gab.adjoint() - gba);
                if (defect > tol) {
                    report.satisfied = false;
                    report.violations.push_back({a, b, defect});
                }
            }
        }
        return report;
    }

    friend HybridModel build_model(HybridModelSpec spec);

private:
    void check_alpha(int alpha) const {
        if (alpha < 0 || alpha >= m_) {
            throw IndexOutOfRange("classical label " + std::to_string(alpha) +
                                  " outside [0, " + std::to_string(m_) + ")");
        }
    }

    void check_psi_dim(int alpha, const Vector& psi) const {
        if (psi.size() != dims_[static_cast<std::size_t>(alpha)]) {
            throw ShapeMismatch("psi has length " + std::to_string(psi.size()) +
                                ", channel " + std::to_string(alpha) +
                                " expects " + std::to_string(dims_[alpha]));
        }
    }

    Matrix eval_hamiltonian(int alpha, double t) const {
        const auto& fn = hamiltonians_[static_cast<std::size_t>(alpha)];
        if (!fn) return Matrix::Zero(dims_[alpha], dims_[alpha]);
        return fn(t);
    }

    Matrix assemble_lambda(int alpha, double t) const {
        Matrix lambda = Matrix::Zero(dims_[alpha], dims_[alpha]);
        for (int to : couplings_out(alpha)) {
            const Matrix g = couplings_[coupling_at(to, alpha)].matrix(t);
            lambda += g.adjoint() * g;
        }
        return hermitize(lambda);
    }

    std::size_t coupling_at(int to, int from) const {
        const auto it = coupling_index_.find({to, from});
        if (it == coupling_index_.end()) {
            throw IndexOutOfRange("no coupling (" + std::to_string(to) + " <- " +
                                  std::to_string(from) + ")");
        }
        return it->second;
    }

    int m_ = 0;
    std::vector<int> dims_;
    std::vector<OperatorFn> hamiltonians_;
    std::vector<CouplingSpec> couplings_;
    std::map<std::pair<int, int>, std::size_t> coupling_index_;  // (to,from)
    std::vector<std::vector<int>> out_targets_;
    bool time_dependent_ = false;
    double hermiticity_tol_ = 1e-10;
    FlowFn flow_;

    // Build-time caches, populated for time-independent models only.
    std::vector<Matrix> cached_h_;
    std::vector<Matrix> cached_g_;
    std::vector<Matrix> cached_lambda_;
    std::vector<Matrix> cached_generator_;
};

/// Validates shapes, Hermiticity, and the no-diagonal-coupling rule, then
/// returns an immutable model. Time-independent models cache all operators
/// and the flow generator at build time.
inline HybridModel build_model(HybridModelSpec spec) {
    if (spec.m < 1) throw Error("build_model: m must be >= 1");
    if (static_cast<int>(spec.dims.size()) != spec.m) {
        throw ShapeMismatch("build_model: dims list has " +
                            std::to_string(spec.dims.size()) +
                            " entries, expected m = " + std::to_string(spec.m));
    }
    for (int d : spec.dims) {
        if (d < 1) throw Error("build_model: Hilbert dimensions must be >= 1");
    }
    if (!spec.hamiltonians.empty() &&
        static_cast<int>(spec.hamiltonians.size()) != spec.m) {
        throw ShapeMismatch("build_model: hamiltonian list size mismatch");
    }

    HybridModel model;
    model.m_ = spec.m;
    model.dims_ = spec.dims;
    model.hamiltonians_ = spec.hamiltonians;
    model.hamiltonians_.resize(static_cast<std::size_t>(spec.m));
    model.couplings_ = std::move(spec.couplings);
    model.time_dependent_ = spec.time_dependent;
    model.hermiticity_tol_ = spec.hermiticity_tol;
    model.flow_ = std::move(spec.flow);
    model.out_targets_.assign(static_cast<std::size_t>(spec.m), {});

    for (std::size_t c = 0; c < model.couplings_.size(); ++c) {
        const auto& cp = model.couplings_[c];
        if (cp.to < 0 || cp.to >= spec.m || cp.from < 0 || cp.from >= spec.m) {
            throw IndexOutOfRange("coupling (" + std::to_string(cp.to) + " <- " +
                                  std::to_string(cp.from) + ") out of range");
        }
        if (cp.to == cp.from) {
            throw DiagonalCoupling("coupling (" + std::to_string(cp.to) + " <- " +
                                   std::to_string(cp.from) +
                                   "): diagonal pairs are not allowed");
        }
        if (!cp.matrix) {
            throw Error("coupling (" + std::to_string(cp.to) + " <- " +
                        std::to_string(cp.from) + ") has no matrix provider");
        }
        if (!model.coupling_index_.emplace(std::make_pair(cp.to, cp.from), c)
                 .second) {
            throw Error("duplicate coupling (" + std::to_string(cp.to) + " <- " +
                        std::to_string(cp.from) + ")");
        }
        model.out_targets_[static_cast<std::size_t>(cp.from)].push_back(cp.to);
    }
    for (auto& targets : model.out_targets_) {
        std::sort(targets.begin(), targets.end());
    }

    std::vector<double> times = spec.validation_times;
    if (times.empty()) times.push_back(0.0);

    for (double t : times) {
        for (int a = 0; a < spec.m; ++a) {
            const Matrix h = model.eval_hamiltonian(a, t);
            if (h.rows() != spec.dims[a] || h.cols() != spec.dims[a]) {
                throw ShapeMismatch("H_" + std::to_string(a) + "(t=" +
                                    std::to_string(t) + ") is " +
                                    std::to_string(h.rows()) + "x" +
                                    std::to_string(h.cols()) + ", expected " +
                                    std::to_string(spec.dims[a]) + " square");
            }
            const double defect = hermiticity_defect(h);
            if (defect > spec.hermiticity_tol) {
                throw NonHermitianHamiltonian(
                    "H_" + std::to_string(a) + "(t=" + std::to_string(t) +
                    ") deviates from Hermitian by " + std::to_string(defect));
            }
        }
        for (const auto& cp : model.couplings_) {
            const Matrix g = cp.matrix(t);
            if (g.rows() != spec.dims[cp.to] || g.cols() != spec.dims[cp.from]) {
                throw ShapeMismatch(
                    "coupling (" + std::to_string(cp.to) + " <- " +
                    std::to_string(cp.from) + ") is " + std::to_string(g.rows()) +
                    "x" + std::to_string(g.cols()) + ", expected " +
                    std::to_string(spec.dims[cp.to]) + "x" +
                    std::to_string(spec.dims[cp.from]));
            }
        }
    }

    if (!model.time_dependent_) {
        model.cached_h_.reserve(static_cast<std::size_t>(spec.m));
        model.cached_lambda_.reserve(static_cast<std::size_t>(spec.m));
        model.cached_generator_.reserve(static_cast<std::size_t>(spec.m));
        for (const auto& cp : model.couplings_) {
            model.cached_g_.push_back(cp.matrix(0.0));
        }
        const Complex mi(0.0, -1.0);
        for (int a = 0; a < spec.m; ++a) {
            model.cached_h_.push_back(model.eval_hamiltonian(a, 0.0));
            Matrix lambda = Matrix::Zero(spec.dims[a], spec.dims[a]);
            for (int to : model.out_targets_[static_cast<std::size_t>(a)]) {
                const Matrix& g = model.cached_g_[model.coupling_at(to, a)];
                lambda += g.adjoint() * g;
            }
            model.cached_lambda_.push_back(hermitize(lambda));
            model.cached_generator_.push_back(mi * model.cached_h_.back() -
                                              0.5 * model.cached_lambda_.back());
        }
    }
    return model;
}

}  // namespace eventum
