#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sarx/rng.hpp"
#include "sarx/types.hpp"

namespace sarx {

// phi = [y_hist; u_hist], both newest first and of exactly n_a / n_c entries.
VectorXd build_regressor(const std::vector<double>& y_hist,
                         const std::vector<double>& u_hist,
                         const SystemOrder& orders);

// Regressor for step t (1-based) of a trajectory, zero pre-history.
VectorXd regressor_at(const Trajectory& traj, int t, const SystemOrder& orders);

// Mode sequence of length T over labels {1..m}.
std::vector<int> generate_switching(const SwitchingPattern& pattern, int m, int T,
                                    std::uint64_t seed);

// Zero-mean gaussian conditioned on |x| <= n_max, by rejection. sigma == 0
// yields 0. Requires n_max > 0 when sigma > 0.
double sample_truncated_gaussian(double sigma, double n_max, Rng& rng);

struct SimulationOptions {
    SwitchingPattern pattern = FastSwitching{};
    NoiseModel noise;
    double input_std = 1.0;
    int T = 0;
    std::uint64_t seed = 0;
    double magnitude_cap = 1e12;  // |y_t| above this aborts with InstabilityError
};

// Core recursion y_t = w_{mode_t}' phi_t + noise_t with supplied sequences.
// Deterministic: replaying stored (modes, u, noise) reproduces y bit for bit.
Trajectory simulate_explicit(const SarxSystem& system, const std::vector<int>& modes,
                             const std::vector<double>& u,
                             const std::vector<double>& noise,
                             double magnitude_cap = 1e12);

// Draws modes / inputs / noise from named sub-streams of opts.seed
// ("switching", "input", "noise"), then runs the recursion.
Trajectory simulate(const SarxSystem& system, const SimulationOptions& opts);

// Second-order single-input subsystems w = [a1, a2, c1] with a1 = p1 + p2,
// a2 = -p1 p2 and poles drawn iid uniform on (-1, 1).
SarxSystem random_system_from_poles(int m, double c1, std::uint64_t seed);

// Multi-output subsystem y_t = sum_j A[j] y_{t-j} + sum_k C[k] u_{t-k}.
struct MimoSubsystem {
    std::vector<MatrixXd> A;  // n_a matrices, each n_y x n_y
    std::vector<MatrixXd> C;  // n_c matrices, each n_y x n_u
};

// Scalar identification problem for one output channel: the channel's output
// regressed on the stacked lagged outputs and inputs.
struct ChannelProblem {
    int channel = 0;              // 0-based output index
    SystemOrder orders;           // n_a * n_y output lags, n_c * n_u input lags
    std::vector<VectorXd> subsystem_params;
};

std::vector<ChannelProblem> mimo_decompose(const std::vector<MimoSubsystem>& subsystems,
                                           int n_y, int n_u);

// CSV with header "t,u,y,mode,noise", 17 significant digits (lossless for
// doubles), t starting at 1.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace sarx
