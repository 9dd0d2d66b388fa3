#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "sarx/errors.hpp"

namespace sarx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Lag structure of the regressor: phi_t stacks n_a past outputs (newest
// first) followed by n_c past inputs (newest first).
struct SystemOrder {
    int n_a = 0;
    int n_c = 0;

    [[nodiscard]] int n() const { return n_a + n_c; }

    void validate() const {
        if (n_a < 0 || n_c < 0 || n() < 1)
            throw ConfigError("orders must satisfy n_a >= 0, n_c >= 0, n_a + n_c >= 1");
    }
};

// One switched linear system: y_t = w_{mode_t}' phi_t + noise_t.
struct SarxSystem {
    SystemOrder orders;
    std::vector<VectorXd> subsystems;  // parameter vector per subsystem, length n

    [[nodiscard]] int m() const { return static_cast<int>(subsystems.size()); }

    void validate() const {
        orders.validate();
        if (subsystems.empty()) throw ConfigError("system needs at least one subsystem");
        for (const auto& w : subsystems)
            if (w.size() != orders.n())
                throw ConfigError("subsystem parameter length does not match n_a + n_c");
        for (std::size_t i = 0; i < subsystems.size(); ++i)
            for (std::size_t j = i + 1; j < subsystems.size(); ++j)
                if ((subsystems[i] - subsystems[j]).norm() == 0.0)
                    throw ConfigError("subsystems must be pairwise distinct");
    }
};

enum class NoiseKind { None, Gaussian, TruncatedGaussian };

struct NoiseModel {
    NoiseKind kind = NoiseKind::None;
    double sigma = 0.0;   // standard deviation before truncation
    double n_max = 0.0;   // hard bound for the truncated kind

    void validate() const {
        switch (kind) {
            case NoiseKind::None:
                break;
            case NoiseKind::Gaussian:
                if (sigma < 0) throw ConfigError("noise sigma must be >= 0");
                break;
            case NoiseKind::TruncatedGaussian:
                if (sigma < 0) throw ConfigError("noise sigma must be >= 0");
                if (sigma > 0 && n_max <= 0)
                    throw ConfigError("truncated noise needs n_max > 0");
                break;
        }
    }

    // The a-priori magnitude bound, if the model has one.
    [[nodiscard]] double bound() const {
        switch (kind) {
            case NoiseKind::None: return 0.0;
            case NoiseKind::TruncatedGaussian: return n_max;
            case NoiseKind::Gaussian: return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }
};

// Mode schedules. Modes are 1-based labels in {1, ..., m} everywhere data is
// stored or written; internal candidate arrays are 0-based.
struct SlowSwitching {
    int block_length = 500;  // mode k+1 holds for steps [k*block+1, (k+1)*block], cycling
};
struct MinDwellSwitching {
    int dwell = 30;          // guaranteed steps per segment
    double geo_p = 1.0 / 16; // extra segment length ~ geometric(p) on {0,1,...}
};
struct FastSwitching {};     // iid uniform over {1..m} each step
struct ExplicitSwitching {
    std::vector<int> sequence;  // 1-based, length >= horizon
};

using SwitchingPattern =
    std::variant<SlowSwitching, MinDwellSwitching, FastSwitching, ExplicitSwitching>;

// Simulated record. All sequences have length T and are indexed by step
// t = 1..T stored at position t-1. Pre-history (t <= 0) is all zero.
struct Trajectory {
    std::vector<double> u;
    std::vector<double> y;
    std::vector<int> modes;      // 1-based
    std::vector<double> noise;

    [[nodiscard]] int T() const { return static_cast<int>(y.size()); }

    void validate() const {
        if (u.size() != y.size() || modes.size() != y.size() || noise.size() != y.size())
            throw ConfigError("trajectory sequences must have equal length");
    }
};

// Upper bound on a candidate's parameter error. Candidates start Unbounded
// and stay so until their bound window fills; the scoring rule treats
// Unbounded as "no takeover protection" rather than as a number.
class ErrorBound {
public:
    ErrorBound() = default;

    static ErrorBound unbounded() { return ErrorBound(); }
    static ErrorBound finite(double v) {
        ErrorBound b;
        b.unbounded_ = false;
        b.value_ = v;
        return b;
    }

    [[nodiscard]] bool is_unbounded() const { return unbounded_; }
    [[nodiscard]] double value() const {
        if (unbounded_) throw InternalError("ErrorBound: value() on unbounded");
        return value_;
    }

    bool operator==(const ErrorBound& o) const {
        return unbounded_ == o.unbounded_ && (unbounded_ || value_ == o.value_);
    }

private:
    bool unbounded_ = true;
    double value_ = 0.0;
};

}  // namespace sarx
