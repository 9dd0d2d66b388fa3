#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sarx/bound.hpp"
#include "sarx/rng.hpp"
#include "sarx/types.hpp"

namespace sarx {

struct InitZeros {};
struct InitGaussian {
    double scale = 1.0;  // iid N(0, scale^2) entries
};
struct InitExplicit {
    std::vector<VectorXd> values;  // one vector per candidate
};
using InitSpec = std::variant<InitZeros, InitGaussian, InitExplicit>;

struct BoundExact {
    int vertex_cap = 24;
};
struct BoundMonteCarlo {
    double zeta1 = 0.99;
    double zeta2 = 0.5;
    long long cap = 20000;
    double sigma = 0.0;  // std of the iid gaussian noise draws fed to the sampler
};
struct BoundMultiWindow {
    std::vector<int> windows;  // window lengths, each swept exactly
    int vertex_cap = 24;
};
struct BoundDisabled {};  // baseline: scores reduce to plain residuals
using BoundMode = std::variant<BoundExact, BoundMonteCarlo, BoundMultiWindow, BoundDisabled>;

struct IdentifierConfig {
    int m = 1;
    SystemOrder orders;
    int window_r = 0;              // update window length, >= n
    int window_c = 0;              // bound window length, >= window_r^2
    double alpha = 4.0;            // takeover protection gain
    double beta = 3.0;             // takeover protection exponent
    double nu = 1e-4;              // regularizer added to the bound in the score
    double n_max = 0.0;            // promised noise magnitude bound (exact modes)
    std::optional<double> gamma;   // forgetting factor in (0.5, 1), newest-column emphasis
    InitSpec init = InitZeros{};
    BoundMode bound_mode = BoundExact{};
    double cond_cap = 1e12;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] bool bounds_enabled() const {
        return !std::holds_alternative<BoundDisabled>(bound_mode);
    }
    // Longest bound window this config maintains (0 when bounds are disabled).
    [[nodiscard]] int max_bound_window() const;
    [[nodiscard]] std::vector<int> bound_windows() const;
};

// One candidate model. Update-window and bound-window matrices slide left:
// the newest entry is always the last column.
struct Candidate {
    VectorXd w_hat;
    long long c = 0;     // data assigned so far (= updates applied)
    MatrixXd phi_R;      // n x window_r update window
    VectorXd y_R;        // matching outputs
    MatrixXd phi_C;      // n x max_bound_window, data used by past updates
    MatrixXd W_C;        // estimate in force before each of those updates
    VectorXd h_C;        // step sizes of those updates
    ErrorBound eps_u;    // current certified error bound

    // Estimate in force before the window's first update, for a window
    // covering the last `window` updates.
    [[nodiscard]] VectorXd w_lag(int window) const { return W_C.col(W_C.cols() - window); }
};

// Residuals, tentative one-step updates and scores for every candidate.
struct ScoreSet {
    VectorXd residuals;            // |y - w_i'phi| / |phi|
    VectorXd factors;              // takeover protection multipliers, >= 1
    VectorXd scores;               // residual * factor
    std::vector<VectorXd> tentative;
};

ScoreSet score_candidates(const VectorXd& phi, double y, const std::vector<Candidate>& cands,
                          double alpha, double beta, double nu);

// Index of the smallest score; ties go to the lowest index.
int assign(const VectorXd& scores);

// Probability of picking each update-window column: squared norms normalized
// by the window's Frobenius norm; with gamma, the newest column's weight is
// gamma and the rest share (1 - gamma), renormalized.
VectorXd column_sampling_weights(const MatrixXd& phi_R, std::optional<double> gamma);

int sample_window_column(const MatrixXd& phi_R, std::optional<double> gamma, Rng& rng);

// One normalized correction step: w - phi (w'phi - y) / |phi|^2. The result
// interpolates w onto the hyperplane {v : v'phi = y}.
VectorXd kaczmarz_update(const VectorXd& w, const VectorXd& phi, double y);

enum class BoundOutcome {
    NotRun,         // step skipped or bounds disabled
    WindowFilling,  // candidate has fewer updates than the bound window needs
    Updated,        // bound recomputed this step
    Stale,          // window system ill conditioned; previous bound kept
};

struct StepResult {
    bool skipped = false;
    int chosen = -1;                    // 0-based candidate index
    VectorXd scores, residuals, factors;
    std::optional<int> sampled_column;  // 0-based update-window column, nullopt = fresh datum
    ErrorBound eps_u_after;             // chosen candidate's bound after the step
    BoundOutcome bound_outcome = BoundOutcome::NotRun;
    double cond = std::numeric_limits<double>::quiet_NaN();
    bool mc_guarantee_void = false;
};

class Identifier {
public:
    explicit Identifier(IdentifierConfig cfg);

    // Processes one datum: scores all candidates, assigns the datum to the
    // best one, applies its randomized update and refreshes its bound. A
    // zero regressor is recorded as skipped and changes nothing.
    StepResult step(const VectorXd& phi, double y);

    [[nodiscard]] const IdentifierConfig& config() const { return cfg_; }
    [[nodiscard]] const std::vector<Candidate>& candidates() const { return cands_; }
    [[nodiscard]] long long steps() const { return steps_; }
    [[nodiscard]] long long skipped_steps() const { return skipped_; }

    // Full state as a documented JSON document (matrices row-major,
    // Unbounded encoded as the string "inf"); restore() resumes a run with
    // bit-identical behavior.
    [[nodiscard]] std::string snapshot() const;
    static Identifier restore(const std::string& snapshot_json);

private:
    BoundOutcome update_bound(Candidate& cand, StepResult& result);

    IdentifierConfig cfg_;
    std::vector<Candidate> cands_;
    Rng columns_rng_;
    Rng mc_rng_;
    long long steps_ = 0;
    long long skipped_ = 0;
};

// Streaming record of one processed step, 1-based step/mode labels as in the
// CSV formats. Unknown values are NaN (errors without ground truth) or 0
// (assigned_mode of a skipped step).
struct StepRecord {
    int t = 0;
    int true_mode = 0;
    int assigned_mode = 0;
    bool skipped = false;
    std::vector<double> scores, residuals, errors;
    ErrorBound eps_u;
    BoundOutcome bound_outcome = BoundOutcome::NotRun;
    double cond = std::numeric_limits<double>::quiet_NaN();
};

// Feeds a trajectory through the identifier. When `truth` is given, errors
// are |w_hat_i - w_i| by raw index (relabeling is a post-run concern).
std::vector<StepRecord> run(Identifier& id, const Trajectory& traj,
                            const SarxSystem* truth = nullptr);

// "t,true_mode,assigned_mode,score_1..m,resid_1..m,err_1..m,eps_u_chosen,skipped"
void write_step_records_csv(std::ostream& os, const std::vector<StepRecord>& records, int m);
void write_step_records_csv(const std::string& path, const std::vector<StepRecord>& records,
                            int m);

// "t,candidate,eps_u,true_err,cond,mode" for every non-skipped step with
// bounds enabled; `mode` names the outcome (exact/mc/multi, filling, stale).
void write_bound_trace_csv(std::ostream& os, const std::vector<StepRecord>& records,
                           const IdentifierConfig& cfg);
void write_bound_trace_csv(const std::string& path, const std::vector<StepRecord>& records,
                           const IdentifierConfig& cfg);

}  // namespace sarx
