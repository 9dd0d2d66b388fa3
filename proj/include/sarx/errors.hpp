#pragma once

#include <stdexcept>
#include <string>

namespace sarx {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values (bad sizes, out-of-range knobs,
// malformed config files). Maps to the CLI "usage/config" exit code.
struct ConfigError : Error {
    using Error::Error;
};

// Simulated output magnitude exceeded the divergence cap.
struct InstabilityError : Error {
    InstabilityError(int step_, double value_)
        : Error("simulation diverged at step " + std::to_string(step_) +
                " (|y| = " + std::to_string(value_) + ")"),
          step(step_), value(value_) {}
    int step;
    double value;
};

// Regressor with zero norm; the per-step scores are undefined.
struct DegenerateRegressor : Error {
    DegenerateRegressor() : Error("regressor has zero norm") {}
};

// Gram matrix of the bound system is numerically singular.
struct IllConditioned : Error {
    explicit IllConditioned(double cond_)
        : Error("bound system is ill conditioned (cond ~ " + std::to_string(cond_) + ")"),
          cond(cond_) {}
    double cond;
};

// Exact vertex enumeration was requested for a window too large to sweep.
struct ExactModeTooLarge : Error {
    ExactModeTooLarge(int window_, int cap_)
        : Error("exact bound needs 2^" + std::to_string(window_) +
                " vertex visits; cap is window <= " + std::to_string(cap_) +
                " (use the monte-carlo mode instead)"),
          window(window_), cap(cap_) {}
    int window;
    int cap;
};

// Closed-form spectral quantities blow up for (near-)marginal poles.
struct PoleDegeneracy : Error {
    using Error::Error;
};

// Invariant violation inside the library (e.g. non-finite score).
struct InternalError : Error {
    using Error::Error;
};

}  // namespace sarx
