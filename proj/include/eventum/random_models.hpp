// random_models.hpp — seeded random operators and the built-in test models
//
// Everything here is a pure function of its seed, so "random" models are
// reproducible fixtures: the same seed yields bit-identical matrices on
// every run and platform.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "eventum/linalg.hpp"
#include "eventum/model.hpp"
#include "eventum/rng.hpp"

namespace eventum {

/// Standard complex Gaussian via Box-Muller on the stream's own uniforms
/// (keeps draws platform-independent, unlike std::normal_distribution).
inline Complex random_complex_gaussian(RngStream& rng) {
    const double u1 = rng.next_open01();
    const double u2 = rng.next_open01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    // sqrt(1/2) per component so E|z|^2 = 1.
    return Complex(radius * std::cos(angle), radius * std::sin(angle)) *
           std::numbers::sqrt2 / 2.0;
}

inline Matrix random_matrix(RngStream& rng, int rows, int cols,
                            double scale = 1.0) {
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            g(i, j) = scale * random_complex_gaussian(rng);
        }
    }
    return g;
}

inline Matrix random_hermitian(RngStream& rng, int n, double scale = 1.0) {
    const Matrix g = random_matrix(rng, n, n, scale);
    return hermitize(g);
}

inline Vector random_unit_vector(RngStream& rng, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = random_complex_gaussian(rng);
    return v / v.norm();
}

/// Random unitary from the QR factorization of a Ginibre matrix.
inline Matrix random_unitary(RngStream& rng, int n) {
    const Matrix g = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // Fix phases so the factorization is unique (and the result exactly
    // reproducible given the seed).
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        if (a > 0.0) q.col(j) *= d / a;
    }
    return q;
}

/// Fully coupled model with random Hermitian Hamiltonians and random
/// couplings on every off-diagonal pair.
inline HybridModel build_random_model(std::uint64_t seed, int m,
                                      const std::vector<int>& dims,
                                      double hamiltonian_scale = 1.0,
                                      double coupling_scale = 0.6) {
    RngStream rng(seed, 0);
    HybridModelSpec spec;
    spec.m = m;
    spec.dims = dims;
    for (int a = 0; a < m; ++a) {
        const Matrix h = random_hermitian(rng, dims[a], hamiltonian_scale);
        spec.hamiltonians.push_back([h](double) { return h; });
    }
    for (int to = 0; to < m; ++to) {
        for (int from = 0; from < m; ++from) {
            if (to == from) continue;
            const Matrix g =
                random_matrix(rng, dims[to], dims[from], coupling_scale);
            spec.couplings.push_back(
                {to, from, [g](double) { return g; }, {}});
        }
    }
    return build_model(std::move(spec));
}

inline constexpr std::uint64_t kDefaultModelSeed = 12345;

/// Two classical states, two-dimensional Hilbert spaces; the standard
/// fixture for master-equation cross-checks.
inline HybridModel build_testpair_model(std::uint64_t seed = kDefaultModelSeed) {
    return build_random_model(seed, 2, {2, 2});
}

/// Three classical states; richer channel structure for sampler comparisons.
inline HybridModel build_testtriple_model(
    std::uint64_t seed = kDefaultModelSeed) {
    return build_random_model(seed, 3, {2, 2, 2});
}

}  // namespace eventum
