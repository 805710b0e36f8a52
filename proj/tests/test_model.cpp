#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "eventum/errors.hpp"
#include "eventum/model.hpp"
#include "eventum/random_models.hpp"
#include "test_support.hpp"

using namespace eventum;
using test_support::lambda_oracle;
using test_support::raw_random_model;

namespace {

HybridModel scalar_coupling_model(double kappa, int dim = 2) {
    HybridModelSpec spec;
    spec.m = 2;
    spec.dims = {dim, dim};
    const Matrix g = std::sqrt(kappa) * Matrix::Identity(dim, dim);
    spec.couplings.push_back({1, 0, [g](double) { return g; }, {}});
    return build_model(std::move(spec));
}

}  // namespace

TEST_CASE("detector skeleton builds and derives scalar operators", "[model]") {
    const HybridModel model = scalar_coupling_model(1.0);
    REQUIRE(model.num_states() == 2);
    REQUIRE(model.has_coupling(1, 0));
    REQUIRE_FALSE(model.has_coupling(0, 1));

    const Matrix lambda = model.lambda_op(0, 0.0);
    REQUIRE(max_abs(lambda - Matrix::Identity(2, 2)) < 1e-14);
    REQUIRE(model.lambda_op(1, 0.0).isZero(1e-14));
}

TEST_CASE("coupling shape mismatches are rejected", "[model]") {
    HybridModelSpec spec;
    spec.m = 2;
    spec.dims = {2, 3};
    const Matrix bad = Matrix::Identity(2, 3);  // needs dims[1] x dims[0] = 3x2
    spec.couplings.push_back({1, 0, [bad](double) { return bad; }, {}});
    REQUIRE_THROWS_AS(build_model(std::move(spec)), ShapeMismatch);
}

TEST_CASE("diagonal couplings and bad labels are rejected", "[model]") {
    HybridModelSpec spec;
    spec.m = 2;
    spec.dims = {2, 2};
    const Matrix g = Matrix::Identity(2, 2);
    spec.couplings.push_back({0, 0, [g](double) { return g; }, {}});
    REQUIRE_THROWS_AS(build_model(std::move(spec)), DiagonalCoupling);

    HybridModelSpec spec2;
    spec2.m = 2;
    spec2.dims = {2, 2};
    spec2.couplings.push_back({2, 0, [g](double) { return g; }, {}});
    REQUIRE_THROWS_AS(build_model(std::move(spec2)), IndexOutOfRange);
}

TEST_CASE("non-Hermitian Hamiltonians are rejected", "[model]") {
    HybridModelSpec spec;
    spec.m = 1;
    spec.dims = {2};
    Matrix h = Matrix::Zero(2, 2);
    h(0, 1) = 1.0;  // strictly upper triangular, not Hermitian
    spec.hamiltonians.push_back([h](double) { return h; });
    REQUIRE_THROWS_AS(build_model(std::move(spec)), NonHermitianHamiltonian);
}

TEST_CASE("random model operators match the brute-force oracle", "[model]") {
    const std::uint64_t seed = 777;
    const std::vector<int> dims = {2, 2, 2};
    const HybridModel model = build_random_model(seed, 3, dims);
    const auto raw = raw_random_model(seed, 3, dims);

    for (int a = 0; a < 3; ++a) {
        std::vector<Matrix> outgoing;
        for (int to = 0; to < 3; ++to) {
            if (to != a) outgoing.push_back(raw.couplings[to][a]);
        }
        const Matrix oracle = lambda_oracle(outgoing);
        REQUIRE(max_abs(model.lambda_op(a, 0.0) - oracle) < 1e-12);
        REQUIRE(min_eigenvalue(model.lambda_op(a, 0.0)) > -1e-10);

        RngStream rng(11, static_cast<std::uint64_t>(a));
        const Vector psi = random_unit_vector(rng, dims[a]);
        const double rate = model.jump_rate(a, psi, 0.0);
        const double rate_oracle = std::real(psi.dot(oracle * psi));
        REQUIRE(rate == Catch::Approx(rate_oracle).margin(1e-12));

        const auto probs = model.jump_probs(a, psi, 0.0);
        double total = 0.0;
        for (int b = 0; b < 3; ++b) {
            if (b == a) {
                REQUIRE(probs[b] == 0.0);
                continue;
            }
            const double expected =
                (raw.couplings[b][a] * psi).squaredNorm() / rate_oracle;
            REQUIRE(probs[b] == Catch::Approx(expected).margin(1e-12));
            total += probs[b];
        }
        REQUIRE(total == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("jump rate and channel weights under state scaling", "[model]") {
    const HybridModel model = build_random_model(31, 2, {3, 3});
    RngStream rng(5, 0);
    const Vector psi = random_unit_vector(rng, 3);
    const Complex c(1.3, -0.4);
    const Vector scaled = c * psi;

    const double r1 = model.jump_rate(0, psi, 0.0);
    const double r2 = model.jump_rate(0, scaled, 0.0);
    REQUIRE(r2 == Catch::Approx(std::norm(c) * r1).epsilon(1e-12));

    const auto p1 = model.jump_probs(0, psi, 0.0);
    const auto p2 = model.jump_probs(0, scaled, 0.0);
    for (std::size_t b = 0; b < p1.size(); ++b) {
        REQUIRE(p2[b] == Catch::Approx(p1[b]).margin(1e-10));
    }
}

TEST_CASE("dark states have zero rate and no channel distribution", "[model]") {
    // Rank-1 coupling |0><0|: e_1 lies in its kernel.
    HybridModelSpec spec;
    spec.m = 2;
    spec.dims = {2, 2};
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = 1.0;
    spec.couplings.push_back({1, 0, [g](double) { return g; }, {}});
    const HybridModel model = build_model(std::move(spec));

    Vector dark = Vector::Zero(2);
    dark(1) = 1.0;
    REQUIRE(model.jump_rate(0, dark, 0.0) == 0.0);
    REQUIRE_THROWS_AS(model.jump_probs(0, dark, 0.0), ZeroRate);
}

TEST_CASE("two scalar channels split in proportion to their rates", "[model]") {
    const double k1 = 1.0, k2 = 3.0;
    HybridModelSpec spec;
    spec.m = 3;
    spec.dims = {2, 2, 2};
    const Matrix g1 = std::sqrt(k1) * Matrix::Identity(2, 2);
    const Matrix g2 = std::sqrt(k2) * Matrix::Identity(2, 2);
    spec.couplings.push_back({1, 0, [g1](double) { return g1; }, {}});
    spec.couplings.push_back({2, 0, [g2](double) { return g2; }, {}});
    const HybridModel model = build_model(std::move(spec));

    Vector psi = Vector::Zero(2);
    psi(0) = 1.0;
    const auto probs = model.jump_probs(0, psi, 0.0);
    REQUIRE(probs[0] == 0.0);
    REQUIRE(probs[1] == Catch::Approx(k1 / (k1 + k2)).margin(1e-12));
    REQUIRE(probs[2] == Catch::Approx(k2 / (k1 + k2)).margin(1e-12));
}

TEST_CASE("detailed balance is diagnosed, never required", "[model]") {
    // Symmetric pair g_{0,1} = A†, g_{1,0} = A.
    RngStream rng(99, 0);
    const Matrix a = random_matrix(rng, 2, 2);
    {
        HybridModelSpec spec;
        spec.m = 2;
        spec.dims = {2, 2};
        const Matrix ad = a.adjoint();
        spec.couplings.push_back({1, 0, [a](double) { return a; }, {}});
        spec.couplings.push_back({0, 1, [ad](double) { return ad; }, {}});
        const HybridModel model = build_model(std::move(spec));
        const auto report = model.check_detailed_balance(0.0, 1e-12);
        REQUIRE(report.satisfied);
        REQUIRE(report.violations.empty());
    }
    {
        // One-way coupling (the detector structure) violates the symmetry.
        const HybridModel model = scalar_coupling_model(1.0);
        const auto report = model.check_detailed_balance(0.0, 1e-12);
        REQUIRE_FALSE(report.satisfied);
        REQUIRE(report.violations.size() == 1);
        REQUIRE(report.violations[0].alpha == 0);
        REQUIRE(report.violations[0].beta == 1);
        REQUIRE(report.violations[0].defect > 0.5);
    }
    {
        const HybridModel model = build_random_model(123, 3, {2, 2, 2});
        REQUIRE_FALSE(model.check_detailed_balance(0.0, 1e-10).satisfied);
    }
}

TEST_CASE("time-dependent models validate on the sample grid", "[model]") {
    // Provider whose shape breaks at t = 1.
    HybridModelSpec spec;
    spec.m = 2;
    spec.dims = {2, 2};
    spec.time_dependent = true;
    spec.validation_times = {0.0, 1.0};
    spec.couplings.push_back(
        {1, 0,
         [](double t) {
             return t < 0.5 ? Matrix::Identity(2, 2) : Matrix::Identity(3, 2);
         },
         {}});
    REQUIRE_THROWS_AS(build_model(std::move(spec)), ShapeMismatch);
}

TEST_CASE("randomized channel weights always sum to one", "[model][property]") {
    for (std::uint64_t s = 0; s < 25; ++s) {
        const HybridModel model = build_random_model(1000 + s, 3, {2, 3, 2});
        RngStream rng(2000 + s, 0);
        for (int k = 0; k < 8; ++k) {
            const int a = static_cast<int>(rng.next_u64() % 3);
            const Vector psi = random_unit_vector(rng, model.dim(a));
            const auto probs = model.jump_probs(a, psi, 0.0);
            double total = 0.0;
            for (double p : probs) {
                REQUIRE(p >= 0.0);
                total += p;
            }
            REQUIRE(total == Catch::Approx(1.0).margin(1e-10));
        }
    }
}
