// fixtures.hpp — standard model setups shared by the demos and the
// verification harness

#pragma once

#include <cstdint>
#include <vector>

#include "eventum/linalg.hpp"
#include "eventum/model.hpp"
#include "eventum/models.hpp"
#include "eventum/random_models.hpp"

namespace eventum::fixtures {

struct DetectorFixture {
    DetectorSpec spec;
    HybridModel model;
    Vector psi0;
    PureHybridState initial;
    double packet_x0 = 0.0;
    double packet_sigma = 1.0;
    double horizon = 5.0;
    std::vector<double> checkpoints;
};

/// Streaming packet against a stationary near-point detector: the packet
/// (sigma = 1, centered at -1) crosses the detector at a = 2 well within the
/// horizon of 5.
inline DetectorFixture standard_detector(double kappa,
                                         DetectorSpec::Kind kind =
                                             DetectorSpec::Kind::Shift) {
    DetectorFixture f;
    f.spec.kappa = kappa;
    f.spec.width = 288.0;
    f.spec.a = 2.0;
    f.spec.grid = Grid1D{19.2, 1152};
    f.spec.hamiltonian = kind;
    f.spec.horizon = 5.0;
    f.horizon = 5.0;
    f.packet_x0 = -1.0;
    f.packet_sigma = 1.0;
    f.checkpoints = {1.0, 2.0, 3.0, 4.0, 5.0};
    f.model = build_detector_model(f.spec);
    f.psi0 = gaussian_packet(f.spec.grid, f.packet_x0, f.packet_sigma);
    f.initial = PureHybridState{0, f.psi0, true};
    return f;
}

/// Detector sitting on the packet peak; used for the short-exposure rate
/// comparison where |psi0(a)|^2 should be sampled at its flattest point.
inline DetectorFixture born_detector(double kappa) {
    DetectorFixture f = standard_detector(kappa);
    f.spec.a = f.packet_x0;
    f.model = build_detector_model(f.spec);
    f.initial = PureHybridState{0, f.psi0, true};
    return f;
}

struct ClockFixture {
    ClockSpec spec;
    HybridModel model;
    PureHybridState initial;
    double horizon = 10.0;
};

inline ClockFixture standard_clock(double kappa, double horizon,
                                   int dim = 2) {
    ClockFixture f;
    f.spec.kappa = kappa;
    f.spec.horizon = horizon;
    f.spec.dim = dim;
    f.horizon = horizon;
    f.model = build_clock_model(f.spec);
    Vector psi0 = Vector::Zero(dim);
    psi0(0) = 1.0;
    f.initial = PureHybridState{0, psi0, true};
    return f;
}

/// Basis-vector initial state in block 0 of any model.
inline PureHybridState ground_initial(const HybridModel& model) {
    Vector psi0 = Vector::Zero(model.dim(0));
    psi0(0) = 1.0;
    return PureHybridState{0, psi0, true};
}

}  // namespace eventum::fixtures
