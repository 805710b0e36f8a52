#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "eventum/rng.hpp"

using eventum::RngStream;

TEST_CASE("streams are pure functions of (seed, index)", "[rng]") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }

    // A fresh stream reproduces the sequence regardless of construction order.
    RngStream c(42, 7);
    RngStream unrelated(42, 8);
    unrelated.next_u64();
    RngStream a2(42, 7);
    REQUIRE(c.next_u64() == a2.next_u64());
}

TEST_CASE("distinct streams and seeds decorrelate", "[rng]") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    RngStream c(43, 0);
    int equal_ab = 0;
    int equal_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto xa = a.next_u64();
        if (xa == b.next_u64()) ++equal_ab;
        if (xa == c.next_u64()) ++equal_ac;
    }
    REQUIRE(equal_ab == 0);
    REQUIRE(equal_ac == 0);
}

TEST_CASE("uniform draws stay inside the open interval", "[rng]") {
    RngStream rng(2026, 3);
    const int n = 1000000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_open01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    // 4-sigma bands for U(0,1) moments.
    REQUIRE(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
    REQUIRE(std::abs(var - 1.0 / 12.0) < 4.0 * 0.0745 / std::sqrt(n));
}
