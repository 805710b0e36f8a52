// Minimal library usage: propagate a packet past a detector and compare the
// engine's survival probability with the closed form.

#include <cstdio>

#include "eventum/fixtures.hpp"
#include "eventum/models.hpp"

using namespace eventum;

int main() {
    const auto fx = fixtures::standard_detector(1.0);
    std::printf("%8s %18s %18s\n", "t", "1 - |psi(t)|^2", "closed form");
    Vector psi = fx.psi0;
    double t = 0.0;
    for (double tc : fx.checkpoints) {
        psi = fx.model.flow(0, psi, t, tc - t);
        t = tc;
        const double detected = 1.0 - psi.squaredNorm();
        const double closed = detection_prob_closed_form(fx.spec, fx.psi0, tc);
        std::printf("%8.2f %18.10f %18.10f\n", tc, detected, closed);
    }
    return 0;
}
