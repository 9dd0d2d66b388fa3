#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sarx/identify.hpp"
#include "sarx/model.hpp"
#include "sarx/types.hpp"

namespace sarx {

// Candidate labels are arbitrary, so final estimates are matched to the true
// subsystems before any error is reported: h[j] is the candidate assigned to
// subsystem j, minimizing the total parameter distance. Exhaustive over all
// permutations (m <= 8); ties go to the lexicographically smallest h.
std::vector<int> relabel(const std::vector<VectorXd>& estimates,
                         const std::vector<VectorXd>& truth);

struct Metrics {
    double fe = 0.0;   // mean parameter error over subsystems, after relabeling
    double cer = 0.0;  // fraction of steps whose assignment maps to the wrong subsystem
};

// Skipped steps count as misassigned.
Metrics compute_metrics(const std::vector<StepRecord>& records, const SarxSystem& truth,
                        const std::vector<VectorXd>& final_estimates,
                        const std::vector<int>& h);

// One experiment cell: M independent realizations of (system, trajectory,
// identification), optionally comparing against the residual-only baseline
// (same identifier with bound_mode = disabled) on identical data.
struct RealizationPlan {
    SarxSystem system;            // ignored when random_system is set
    bool random_system = false;
    int random_m = 4;
    double random_c1 = 1.0;
    SwitchingPattern pattern = FastSwitching{};
    NoiseModel noise;
    double input_std = 1.0;
    int T = 0;
    IdentifierConfig identifier;  // template; per-realization seeds derived
    bool compare_baseline = true;
    int realizations = 1;
    std::uint64_t base_seed = 0;
};

struct RealizationResult {
    bool failed = false;  // simulation diverged; excluded from the means
    double fe_ours = std::numeric_limits<double>::quiet_NaN();
    double cer_ours = std::numeric_limits<double>::quiet_NaN();
    double fe_base = std::numeric_limits<double>::quiet_NaN();
    double cer_base = std::numeric_limits<double>::quiet_NaN();
};

struct CellSummary {
    int realizations = 0;
    int failed = 0;
    double fe_ours = 0.0, cer_ours = 0.0;  // means over completed realizations
    double fe_base = 0.0, cer_base = 0.0;
    std::vector<RealizationResult> per_run;
};

// Deterministic for a fixed base_seed regardless of thread count: every
// realization derives its own seeds from (base_seed, index).
CellSummary run_realizations(const RealizationPlan& plan, int threads = 1);

// Mean squared parameter error of a single-candidate identifier across
// realizations; index t runs 0..T with t = 0 the initial estimate. Also
// reports the data extremes the convergence envelopes need.
struct ErrorCurve {
    std::vector<double> mean_sq;
    double phi_max = 0.0;
    double s_min = std::numeric_limits<double>::infinity();  // min |phi|/|n| over noisy steps
};

ErrorCurve empirical_error_curve(const SarxSystem& system, const SimulationOptions& sim,
                                 const IdentifierConfig& ident, int realizations,
                                 std::uint64_t base_seed);

// Window excitation, regressor magnitudes, signal-to-noise extremes and (with
// ground truth) the between-subsystem output margin of one trajectory.
struct Diagnostics {
    double sigma_min = std::numeric_limits<double>::infinity();
    double sigma_max = 0.0;
    double phi_max = 0.0;
    std::optional<double> s_min, s_max;
    std::optional<double> psi;
};

Diagnostics assumption_diagnostics(const Trajectory& traj, const SystemOrder& orders,
                                   int window_r, int stride = 1,
                                   const SarxSystem* truth = nullptr);

struct ExperimentRow {
    std::string setup;
    double noise = 0.0;
    double fe_ours = 0.0, fe_base = 0.0;
    double cer_ours = 0.0, cer_base = 0.0;
    int failed = 0;
};

// "setup,noise,fe_ours,fe_base,cer_ours,cer_base,failed"
void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
void write_experiment_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

}  // namespace sarx
