// errors.hpp — exception taxonomy shared by all eventum components

#pragma once

#include <stdexcept>
#include <string>

namespace eventum {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ----- model construction / evaluation -----
struct ShapeMismatch : Error {
    using Error::Error;
};
struct NonHermitianHamiltonian : Error {
    using Error::Error;
};
struct DiagonalCoupling : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct ZeroRate : Error {
    using Error::Error;
};

// ----- trajectory engine -----
struct StepRejected : Error {
    using Error::Error;
};
struct RetryCapExceeded : Error {
    using Error::Error;
};
struct InvalidDistribution : Error {
    using Error::Error;
};
struct ZeroPostJumpNorm : Error {
    using Error::Error;
};

// ----- master-equation integrator -----
struct ToleranceBreach : Error {
    using Error::Error;
};
struct DimMismatch : Error {
    using Error::Error;
};

// ----- ensemble estimation -----
struct HorizonExceeded : Error {
    using Error::Error;
};

// ----- concrete models -----
struct GridTooCoarse : Error {
    using Error::Error;
};
struct NonCommensurateTime : Error {
    using Error::Error;
};
struct NotIsometry : Error {
    using Error::Error;
};

// ----- CLI / configuration -----
struct UsageError : Error {
    using Error::Error;
};

}  // namespace eventum
