#pragma once

#include <stdexcept>
#include <string>

namespace lrg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

// A QR diagonal collapsed below the rank tolerance.
struct RankDeficientError : Error {
    using Error::Error;
};

struct NotSymmetricError : Error {
    using Error::Error;
};

struct NotPsdError : Error {
    using Error::Error;
};

// Every spectrum entry is zero, so no inclusion plan exists.
struct InfeasibleSpectrumError : Error {
    using Error::Error;
};

struct InvalidProbabilitiesError : Error {
    using Error::Error;
};

struct MissingWeightsError : Error {
    using Error::Error;
};

// An optimizer iterate picked up a NaN/Inf entry (divergent step size).
struct NonFiniteIterateError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace lrg
