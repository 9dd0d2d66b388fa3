#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sarx/rng.hpp"
#include "sarx/types.hpp"

namespace sarx {

// Per-column dot products: out[j] = A.col(j) . B.col(j).
VectorXd column_dot(const MatrixXd& A, const MatrixXd& B);

// Linear description of a candidate's parameter error over one update window:
// err = b - A * noise, where noise collects the (unknown) noise values of the
// data used by the window's updates. A is n x W, b is length n.
struct BoundComputation {
    MatrixXd A;
    VectorXd b;
    double cond = 0.0;  // condition estimate of the window Gram matrix
};

// Builds the window system from the last W updates of one candidate:
//   phi_C  n x W   data vectors used by the updates
//   W_C    n x W   estimate in force before each update
//   h_C    W       step sizes (1 / |phi*|^2)
//   w_now          current estimate
//   w_lag          estimate in force before the window's first update
// Throws IllConditioned when the Gram matrix condition exceeds cond_cap.
BoundComputation assemble_bound_system(const MatrixXd& phi_C, const MatrixXd& W_C,
                                       const VectorXd& h_C, const VectorXd& w_now,
                                       const VectorXd& w_lag, double cond_cap = 1e12);

// Exact maximum of |b - A v| over the noise cube v in {-n_max, +n_max}^W,
// swept with a binary-reflected Gray code (one rank-1 update per vertex) and
// the v/-v pairing. Throws ExactModeTooLarge when W > vertex_cap.
double exact_upper_bound(const BoundComputation& bc, double n_max, int vertex_cap = 24);

// Sampled maximum of |b - A v| over draws from `sampler` (each draw must
// have length W). Never exceeds the exact cube maximum when the sampler
// respects |v_i| <= n_max.
double monte_carlo_upper_bound(const BoundComputation& bc,
                               const std::function<VectorXd()>& sampler, long long n_samples);

struct McScheduleParams {
    double zeta1 = 0.99;       // in (0, 1)
    double zeta2 = 0.5;        // in (0, 1)
    long long cap = 20000;     // hard per-step sample budget
};

struct McSamples {
    long long n = 0;
    bool guarantee_void = false;  // true when the schedule was clamped to cap
};

// Sample count for update index t >= 1: ceil(zeta2 * t / (2 * zeta1^(2t))),
// clamped to the cap. The clamp voids the schedule's coverage guarantee.
McSamples mc_sample_schedule(long long t, const McScheduleParams& params);

// Combines several window lengths: the certified bound is the max over the
// per-window exact bounds, and any window that is not yet full (nullopt)
// makes the result Unbounded.
ErrorBound multi_window_bound(const std::vector<std::optional<BoundComputation>>& windows,
                              double n_max, int vertex_cap = 24);

}  // namespace sarx
