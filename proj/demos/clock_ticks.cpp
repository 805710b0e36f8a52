// Minimal library usage: sample a few clock histories and print tick times.

#include <cstdio>

#include "eventum/fixtures.hpp"
#include "eventum/pdp.hpp"

using namespace eventum;

int main() {
    const auto fx = fixtures::standard_clock(2.0, 5.0);
    for (int k = 0; k < 4; ++k) {
        RngStream rng(42, static_cast<std::uint64_t>(k));
        const auto rec = run_trajectory(fx.model, fx.initial, 0.0, 5.0, rng);
        std::printf("trajectory %d: %zu ticks at", k, rec.events.size());
        for (const auto& ev : rec.events) std::printf(" %.3f", ev.time);
        std::printf("\n");
    }
    return 0;
}
