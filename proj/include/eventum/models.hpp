// models.hpp — the two concrete reference systems: a 1D particle detector
// with an exactly solvable streaming limit, and a fuzzy clock whose only
// events are Poisson ticks.
//
// Detector. Two classical states, on (0) and off (1); the only coupling is
// on -> off by the multiplication operator g(x - a(t)) with a Gaussian
// profile whose squared profile integrates to kappa. With the streaming
// Hamiltonian H = -i d/dx the non-unitary flow is solved exactly along
// characteristics, so the model is built in the co-moving frame y = x - t:
// the Hamiltonian disappears, the coupling becomes the time-dependent
// multiplication by g(y + t - a(t)), and the flow damps each grid point by
// a closed-form error-function factor. Event statistics are frame-invariant.
//
// Clock. Classical states are tick counts 0..i_max; each coupling
// g_{i,i-1} = sqrt(kappa) U_i with U_i an isometry, so the event rate is
// kappa for every normalized state and ticks are Poisson. The last site is
// absorbing, which leaves every lower block's trace exactly Poisson.

#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "eventum/errors.hpp"
#include "eventum/linalg.hpp"
#include "eventum/model.hpp"
#include "eventum/stats.hpp"

namespace eventum {

// ------------------------------ 1D grid ------------------------------------

struct Grid1D {
    double length = 24.0;
    int n = 600;
    bool periodic = true;

    double dx() const { return length / n; }
    double x(int j) const { return -0.5 * length + j * dx(); }
    double x_min() const { return -0.5 * length; }
    double x_max() const { return -0.5 * length + (n - 1) * dx(); }
};

/// l2-normalized Gaussian packet on the grid; |psi_j|^2 is the probability
/// mass of cell j, so |psi(x)|^2 dx-densities are |psi_j|^2 / dx.
inline Vector gaussian_packet(const Grid1D& grid, double x0, double sigma,
                              double momentum = 0.0) {
    Vector psi(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        const double x = grid.x(j);
        const double envelope = std::exp(-(x - x0) * (x - x0) /
                                         (4.0 * sigma * sigma));
        psi(j) = envelope * std::exp(Complex(0.0, momentum * x));
    }
    return psi / psi.norm();
}

/// Continuum density |psi(x)|^2 at x, linearly interpolated from cell masses.
inline double packet_density_at(const Grid1D& grid, const Vector& psi,
                                double x) {
    const double dx = grid.dx();
    const double pos = (x - grid.x_min()) / dx;
    const int j0 = static_cast<int>(std::floor(pos));
    const double frac = pos - j0;
    auto cell = [&](int j) {
        if (j < 0 || j >= grid.n) return 0.0;
        return std::norm(psi(j)) / dx;
    };
    return (1.0 - frac) * cell(j0) + frac * cell(j0 + 1);
}

/// Probability mass of psi in the interval [lo, hi], with linear fractions
/// for the boundary cells.
inline double packet_interval_mass(const Grid1D& grid, const Vector& psi,
                                   double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double dx = grid.dx();
    double mass = 0.0;
    for (int j = 0; j < grid.n; ++j) {
        const double cell_lo = grid.x(j) - 0.5 * dx;
        const double cell_hi = grid.x(j) + 0.5 * dx;
        const double overlap =
            std::max(0.0, std::min(hi, cell_hi) - std::max(lo, cell_lo));
        if (overlap > 0.0) mass += std::norm(psi(j)) * (overlap / dx);
    }
    return mass;
}

// ----------------------------- detector ------------------------------------

struct DetectorSpec {
    double kappa = 1.0;  // efficiency: total damping of a full crossing
    double width = 50.0; // Gaussian exponent of the coupling profile
    int n_dims = 1;
    double a = 0.0;      // detector position (constant)
    /// Optional moving detector a(t); leave empty for the constant position.
    std::function<double(double)> trajectory;
    Grid1D grid;
    enum class Kind { Shift, Zero };
    /// Shift: streaming Hamiltonian -i d/dx (co-moving exact flow).
    /// Zero: H = 0, static multiplication coupling.
    Kind hamiltonian = Kind::Shift;
    double horizon = 5.0;  // span used to validate domain coverage
};

/// Coupling profile g with g^2 a unit-mass Gaussian scaled by kappa, so the
/// narrow-width limit is the point detector g^2 -> kappa * delta(x - a).
inline double detector_g(const DetectorSpec& spec, double x) {
    return std::sqrt(spec.kappa) *
           std::pow(2.0 * spec.width / std::numbers::pi, 0.25) *
           std::exp(-spec.width * x * x);
}

inline double detector_g_sq(const DetectorSpec& spec, double x) {
    return spec.kappa * std::sqrt(2.0 * spec.width / std::numbers::pi) *
           std::exp(-2.0 * spec.width * x * x);
}

/// Standard deviation of the g^2 profile.
inline double detector_sigma_g(const DetectorSpec& spec) {
    return 1.0 / (2.0 * std::sqrt(spec.width));
}

/// Documented point-detector regime: profile narrower than four cells.
inline bool detector_point_regime(const DetectorSpec& spec) {
    return detector_sigma_g(spec) < 4.0 * spec.grid.dx();
}

namespace detail {

inline double detector_position(const DetectorSpec& spec, double t) {
    return spec.trajectory ? spec.trajectory(t) : spec.a;
}

/// Integral of g^2 over [p, q] (closed form).
inline double g_sq_integral(const DetectorSpec& spec, double p, double q) {
    const double c = std::sqrt(2.0 * spec.width);
    return 0.5 * spec.kappa * (std::erf(c * q) - std::erf(c * p));
}

// 8-node Gauss-Legendre abscissae/weights on [-1, 1].
inline constexpr double kGl8X[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr double kGl8W[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

/// Grid-index window outside which the profile (hence the damping over
/// [t, t+h]) is negligible. 7 sigma of the g^2 Gaussian keeps the clipped
/// tail below 1e-10 of the profile mass.
struct DampingWindow {
    int lo = 0;
    int hi = -1;  // inclusive; empty when hi < lo
    std::vector<double> exponents;
};

/// Damping exponents E_j = 1/2 int_t^{t+h} g^2(pos_j(s) - a(s)) ds on the
/// window of affected grid points, where pos_j(s) = y_j + s in the co-moving
/// frame (Shift) or x_j (Zero).
inline DampingWindow damping_exponents(const DetectorSpec& spec, double t,
                                       double h) {
    const Grid1D& grid = spec.grid;
    const bool comoving = spec.hamiltonian == DetectorSpec::Kind::Shift;
    const double margin = 7.0 * detector_sigma_g(spec);

    // Range of detector positions seen during the step, in the frame the
    // grid lives in.
    double pos_lo, pos_hi;
    if (!spec.trajectory) {
        pos_lo = comoving ? spec.a - t - h : spec.a;
        pos_hi = comoving ? spec.a - t : spec.a;
    } else {
        pos_lo = pos_hi = detector_position(spec, t) - (comoving ? t : 0.0);
        for (int q = 0; q <= 8; ++q) {
            const double s = t + h * static_cast<double>(q) / 8.0;
            const double p = detector_position(spec, s) - (comoving ? s : 0.0);
            pos_lo = std::min(pos_lo, p);
            pos_hi = std::max(pos_hi, p);
        }
    }

    DampingWindow win;
    win.lo = std::max(
        0, static_cast<int>(std::floor((pos_lo - margin - grid.x_min()) /
                                       grid.dx())));
    win.hi = std::min(
        grid.n - 1, static_cast<int>(std::ceil((pos_hi + margin - grid.x_min()) /
                                               grid.dx())));
    if (win.hi < win.lo) return win;
    win.exponents.resize(static_cast<std::size_t>(win.hi - win.lo + 1), 0.0);

    if (!spec.trajectory) {
        if (comoving) {
            for (int j = win.lo; j <= win.hi; ++j) {
                const double p = grid.x(j) + t - spec.a;
                win.exponents[static_cast<std::size_t>(j - win.lo)] =
                    0.5 * g_sq_integral(spec, p, p + h);
            }
        } else {
            for (int j = win.lo; j <= win.hi; ++j) {
                win.exponents[static_cast<std::size_t>(j - win.lo)] =
                    0.5 * detector_g_sq(spec, grid.x(j) - spec.a) * h;
            }
        }
        return win;
    }
    // Moving detector: Gauss-Legendre quadrature of the exponent.
    for (int j = win.lo; j <= win.hi; ++j) {
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double s = t + 0.5 * h * (1.0 + kGl8X[q]);
            const double pos = comoving ? grid.x(j) + s : grid.x(j);
            acc += kGl8W[q] * detector_g_sq(spec, pos - detector_position(spec, s));
        }
        win.exponents[static_cast<std::size_t>(j - win.lo)] = 0.25 * h * acc;
    }
    return win;
}

}  // namespace detail

/// Build the two-state detector model (0 = on, 1 = off; the only coupling is
/// on -> off, so "off" stays off forever).
inline HybridModel build_detector_model(const DetectorSpec& spec) {
    if (spec.n_dims != 1) {
        throw Error("build_detector_model: only n_dims = 1 is implemented");
    }
    if (spec.kappa < 0.0) throw Error("build_detector_model: kappa < 0");
    const Grid1D grid = spec.grid;
    const double dx = grid.dx();
    if (spec.width * dx * dx > 0.1) {
        throw GridTooCoarse("grid spacing " + std::to_string(dx) +
                            " does not resolve width " +
                            std::to_string(spec.width) +
                            " (need width*dx^2 <= 0.1)");
    }
    if (spec.kappa > 0.0) {
        // The grid must capture the full coupling mass: sum g^2 dx == kappa.
        double quad = 0.0;
        const double a0 = detail::detector_position(spec, 0.0);
        for (int j = 0; j < grid.n; ++j) {
            quad += detector_g_sq(spec, grid.x(j) - a0) * dx;
        }
        if (std::abs(quad - spec.kappa) > 1e-6 * spec.kappa) {
            throw GridTooCoarse(
                "grid quadrature of g^2 is " + std::to_string(quad) +
                ", expected kappa = " + std::to_string(spec.kappa));
        }
    }
    if (spec.hamiltonian == DetectorSpec::Kind::Shift) {
        // The detector sweeps backwards through the co-moving frame; its
        // profile must stay inside the domain for the whole horizon.
        const double margin = 6.0 * detector_sigma_g(spec);
        for (double t = 0.0; t <= spec.horizon; t += spec.horizon / 16.0 + 1e-12) {
            const double y_det = detail::detector_position(spec, t) - t;
            if (y_det - margin < grid.x_min() || y_det + margin > grid.x_max()) {
                throw Error(
                    "build_detector_model: detector leaves the domain before "
                    "the horizon; enlarge grid.length or shorten horizon");
            }
        }
    }

    const bool comoving = spec.hamiltonian == DetectorSpec::Kind::Shift;
    const bool time_dep = comoving || static_cast<bool>(spec.trajectory);
    DetectorSpec cap = spec;  // captured by the providers

    HybridModelSpec m;
    m.m = 2;
    m.dims = {grid.n, grid.n};
    m.hamiltonians = {};  // H = 0 in both channels (Shift absorbs H into the frame)
    m.time_dependent = time_dep;
    if (time_dep) m.validation_times = {0.0, 0.5 * spec.horizon, spec.horizon};

    auto profile_at = [cap, comoving](int j, double t) {
        const double pos = comoving ? cap.grid.x(j) + t : cap.grid.x(j);
        return detector_g(cap, pos - detail::detector_position(cap, t));
    };
    CouplingSpec coupling;
    coupling.to = 1;
    coupling.from = 0;
    coupling.matrix = [cap, profile_at](double t) {
        Matrix g = Matrix::Zero(cap.grid.n, cap.grid.n);
        for (int j = 0; j < cap.grid.n; ++j) g(j, j) = profile_at(j, t);
        return g;
    };
    coupling.apply = [cap, profile_at](const Vector& psi, double t) {
        Vector out(psi.size());
        for (int j = 0; j < cap.grid.n; ++j) out(j) = profile_at(j, t) * psi(j);
        return out;
    };
    m.couplings.push_back(std::move(coupling));

    m.flow = [cap](int alpha, const Vector& psi, double t, double h) {
        if (alpha != 0) return psi;  // "off" has no damping and no H
        const detail::DampingWindow win = detail::damping_exponents(cap, t, h);
        Vector out = psi;
        for (int j = win.lo; j <= win.hi; ++j) {
            out(j) *= std::exp(-win.exponents[static_cast<std::size_t>(j - win.lo)]);
        }
        return out;
    };
    return build_model(std::move(m));
}

/// Lab-frame solution of the streaming flow at a grid-commensurate time:
/// shift by t and damp by the trapezoid quadrature of the profile along each
/// characteristic. Independent of the co-moving erf route used by the model
/// flow; the two must agree.
inline Vector exact_propagate(const DetectorSpec& spec, const Vector& psi0,
                              double t) {
    if (spec.hamiltonian != DetectorSpec::Kind::Shift) {
        throw Error("exact_propagate: defined for the streaming Hamiltonian");
    }
    const Grid1D& grid = spec.grid;
    if (psi0.size() != grid.n) throw ShapeMismatch("exact_propagate: psi size");
    const double dx = grid.dx();
    const double cells = t / dx;
    const long k = std::lround(cells);
    if (std::abs(cells - static_cast<double>(k)) > 1e-9 * std::max(1.0, cells)) {
        throw NonCommensurateTime("t = " + std::to_string(t) +
                                  " is not a multiple of dx = " +
                                  std::to_string(dx));
    }
    if (k < 0) throw Error("exact_propagate: t must be >= 0");

    Vector out(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        double integral = 0.0;
        for (long i = 0; i <= k; ++i) {
            const double s = static_cast<double>(i) * dx;
            const double u = grid.x(j) - t + s;  // characteristic position
            const double f =
                detector_g_sq(spec, u - detail::detector_position(spec, s));
            const double w = (i == 0 || i == k) ? 0.5 : 1.0;
            integral += w * f * dx;
        }
        if (k == 0) integral = 0.0;
        long src = (j - k) % grid.n;
        if (src < 0) src += grid.n;
        out(j) = std::exp(-0.5 * integral) * psi0(static_cast<int>(src));
    }
    return out;
}

/// Point-detector closed form: p(t) = (1 - e^-kappa) * mass of psi0 in
/// (a - t, a). Assumes the stationary detector.
inline double detection_prob_closed_form(const DetectorSpec& spec,
                                         const Vector& psi0, double t) {
    if (psi0.size() != spec.grid.n) {
        throw ShapeMismatch("detection_prob_closed_form: psi size");
    }
    if (t <= 0.0) return 0.0;
    const double mass = packet_interval_mass(spec.grid, psi0, spec.a - t, spec.a);
    return (1.0 - std::exp(-spec.kappa)) * mass;
}

// ------------------------------- clock -------------------------------------

struct ClockSpec {
    double kappa = 1.0;
    int i_max = 0;          // 0 derives the truncation from the horizon
    double horizon = 10.0;
    int dim = 2;            // uniform site dimension when isometries is empty
    /// U_1..U_i_max with U_i mapping site i-1 to site i; empty means
    /// identities everywhere.
    std::vector<Matrix> isometries;
    bool wrap = false;      // cyclic pointer instead of an absorbing end
};

/// Truncation that keeps the Poisson tail negligible: kappa*T + 6 sigma.
inline int recommended_clock_sites(double kappa, double horizon) {
    const double mu = kappa * horizon;
    return std::max(1, static_cast<int>(std::ceil(mu + 6.0 * std::sqrt(mu))));
}

/// Exact block traces of the truncated clock: Poisson pmf below the
/// absorbing site, the upper tail lumped into it.
inline std::vector<double> clock_block_traces(double kappa, double t,
                                              int i_max) {
    std::vector<double> traces(static_cast<std::size_t>(i_max) + 1, 0.0);
    const double mu = kappa * t;
    double below = 0.0;
    for (int i = 0; i < i_max; ++i) {
        traces[static_cast<std::size_t>(i)] = poisson_pmf(i, mu);
        below += traces[static_cast<std::size_t>(i)];
    }
    traces[static_cast<std::size_t>(i_max)] = std::max(0.0, 1.0 - below);
    return traces;
}

inline HybridModel build_clock_model(const ClockSpec& spec) {
    if (spec.kappa <= 0.0) throw Error("build_clock_model: kappa must be > 0");
    const int recommended = recommended_clock_sites(spec.kappa, spec.horizon);
    const int i_max = spec.i_max > 0 ? spec.i_max : recommended;
    if (i_max < recommended) {
        std::cerr << "eventum: clock truncation i_max = " << i_max
                  << " is below the recommended " << recommended
                  << " for horizon " << spec.horizon << "\n";
    }

    std::vector<Matrix> isometries = spec.isometries;
    if (isometries.empty()) {
        isometries.assign(static_cast<std::size_t>(i_max),
                          Matrix::Identity(spec.dim, spec.dim));
    }
    if (static_cast<int>(isometries.size()) != i_max) {
        throw ShapeMismatch("build_clock_model: need i_max isometries");
    }

    std::vector<int> dims;
    dims.push_back(static_cast<int>(isometries.front().cols()));
    for (const auto& u : isometries) {
        if (u.cols() != dims.back()) {
            throw ShapeMismatch("build_clock_model: isometry chain mismatch");
        }
        const Matrix defect =
            u.adjoint() * u - Matrix::Identity(u.cols(), u.cols());
        if (max_abs(defect) > 1e-12) {
            throw NotIsometry("build_clock_model: U†U deviates from I by " +
                              std::to_string(max_abs(defect)));
        }
        dims.push_back(static_cast<int>(u.rows()));
    }

    HybridModelSpec m;
    m.m = i_max + 1;
    m.dims = dims;
    const double root_kappa = std::sqrt(spec.kappa);
    for (int i = 1; i <= i_max; ++i) {
        const Matrix g = root_kappa * isometries[static_cast<std::size_t>(i - 1)];
        m.couplings.push_back({i, i - 1, [g](double) { return g; }, {}});
    }
    if (spec.wrap) {
        if (dims.front() != dims.back()) {
            throw ShapeMismatch("build_clock_model: wrap needs equal end dims");
        }
        const Matrix g =
            root_kappa * Matrix::Identity(dims.front(), dims.back());
        m.couplings.push_back({0, i_max, [g](double) { return g; }, {}});
    }
    return build_model(std::move(m));
}

}  // namespace eventum
