#include "sarx/eval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

namespace sarx {

std::vector<int> relabel(const std::vector<VectorXd>& estimates,
                         const std::vector<VectorXd>& truth) {
    const int m = static_cast<int>(truth.size());
    if (m < 1) throw ConfigError("relabel: no subsystems");
    if (static_cast<int>(estimates.size()) != m)
        throw ConfigError("relabel: estimate count must match subsystem count");
    if (m > 8) throw ConfigError("relabel: exhaustive matching is capped at m = 8");
    for (const auto& w : truth)
        if (w.size() != estimates[0].size())
            throw ConfigError("relabel: dimension mismatch");

    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int j = 0; j < m; ++j) cost += (truth[j] - estimates[perm[j]]).norm();
        if (cost < best_cost) {  // strict: keeps the lexicographically smallest tie
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Metrics compute_metrics(const std::vector<StepRecord>& records, const SarxSystem& truth,
                        const std::vector<VectorXd>& final_estimates,
                        const std::vector<int>& h) {
    const int m = truth.m();
    if (static_cast<int>(h.size()) != m || static_cast<int>(final_estimates.size()) != m)
        throw ConfigError("metrics: h and estimates must have one entry per subsystem");

    Metrics out;
    for (int j = 0; j < m; ++j)
        out.fe += (truth.subsystems[j] - final_estimates[h[j]]).norm();
    out.fe /= m;

    if (!records.empty()) {
        long long wrong = 0;
        for (const auto& rec : records) {
            int mapped = 0;  // candidate (1-based) that subsystem rec.true_mode maps to
            if (rec.true_mode >= 1 && rec.true_mode <= m) mapped = h[rec.true_mode - 1] + 1;
            if (rec.skipped || rec.assigned_mode != mapped) ++wrong;
        }
        out.cer = static_cast<double>(wrong) / static_cast<double>(records.size());
    }
    return out;
}

namespace {

RealizationResult run_one_realization(const RealizationPlan& plan, int k) {
    const std::uint64_t seed_k = derive_seed(plan.base_seed, "realization",
                                             static_cast<std::uint64_t>(k));
    RealizationResult res;

    SarxSystem system = plan.system;
    if (plan.random_system)
        system = random_system_from_poles(plan.random_m, plan.random_c1,
                                          derive_seed(seed_k, "system"));

    SimulationOptions sim;
    sim.pattern = plan.pattern;
    sim.noise = plan.noise;
    sim.input_std = plan.input_std;
    sim.T = plan.T;
    sim.seed = derive_seed(seed_k, "sim");

    Trajectory traj;
    try {
        traj = simulate(system, sim);
    } catch (const InstabilityError&) {
        res.failed = true;
        return res;
    }

    auto evaluate = [&](const IdentifierConfig& cfg, double& fe, double& cer) {
        Identifier id(cfg);
        auto records = run(id, traj, &system);
        std::vector<VectorXd> finals;
        finals.reserve(cfg.m);
        for (const auto& cand : id.candidates()) finals.push_back(cand.w_hat);
        auto h = relabel(finals, system.subsystems);
        Metrics metrics = compute_metrics(records, system, finals, h);
        fe = metrics.fe;
        cer = metrics.cer;
    };

    IdentifierConfig ours = plan.identifier;
    ours.seed = derive_seed(seed_k, "ident");
    evaluate(ours, res.fe_ours, res.cer_ours);

    if (plan.compare_baseline) {
        IdentifierConfig base = ours;  // same seed: identical init and sampling streams
        base.bound_mode = BoundDisabled{};
        evaluate(base, res.fe_base, res.cer_base);
    }
    return res;
}

}  // namespace

CellSummary run_realizations(const RealizationPlan& plan, int threads) {
    if (plan.realizations < 1) throw ConfigError("experiment: need at least one realization");
    if (plan.T < 1) throw ConfigError("experiment: horizon must be >= 1");
    if (!plan.random_system) plan.system.validate();
    plan.identifier.validate();

    const int M = plan.realizations;
    threads = std::clamp(threads, 1, M);

    CellSummary cell;
    cell.realizations = M;
    cell.per_run.resize(M);

    if (threads == 1) {
        for (int k = 0; k < M; ++k) cell.per_run[k] = run_one_realization(plan, k);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (int k = w; k < M; k += threads)
                        cell.per_run[k] = run_one_realization(plan, k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    int completed = 0;
    for (const auto& r : cell.per_run) {
        if (r.failed) {
            ++cell.failed;
            continue;
        }
        ++completed;
        cell.fe_ours += r.fe_ours;
        cell.cer_ours += r.cer_ours;
        if (plan.compare_baseline) {
            cell.fe_base += r.fe_base;
            cell.cer_base += r.cer_base;
        }
    }
    if (completed > 0) {
        cell.fe_ours /= completed;
        cell.cer_ours /= completed;
        cell.fe_base /= completed;
        cell.cer_base /= completed;
    } else {
        cell.fe_ours = cell.cer_ours = std::numeric_limits<double>::quiet_NaN();
        cell.fe_base = cell.cer_base = std::numeric_limits<double>::quiet_NaN();
    }
    return cell;
}

ErrorCurve empirical_error_curve(const SarxSystem& system, const SimulationOptions& sim,
                                 const IdentifierConfig& ident, int realizations,
                                 std::uint64_t base_seed) {
    system.validate();
    ident.validate();
    if (system.m() != 1 || ident.m != 1)
        throw ConfigError("error curve: single-subsystem, single-candidate runs only");
    if (realizations < 1) throw ConfigError("error curve: need at least one realization");

    const VectorXd& w_true = system.subsystems[0];
    ErrorCurve curve;
    curve.mean_sq.assign(sim.T + 1, 0.0);

    for (int k = 0; k < realizations; ++k) {
        const std::uint64_t seed_k =
            derive_seed(base_seed, "realization", static_cast<std::uint64_t>(k));
        SimulationOptions s = sim;
        s.seed = derive_seed(seed_k, "sim");
        Trajectory traj = simulate(system, s);

        IdentifierConfig cfg = ident;
        cfg.seed = derive_seed(seed_k, "ident");
        Identifier id(cfg);

        curve.mean_sq[0] += (id.candidates()[0].w_hat - w_true).squaredNorm();
        for (int t = 1; t <= sim.T; ++t) {
            VectorXd phi = regressor_at(traj, t, cfg.orders);
            double nrm = phi.norm();
            curve.phi_max = std::max(curve.phi_max, nrm);
            double noise = traj.noise[t - 1];
            if (noise != 0.0 && nrm > 0.0)
                curve.s_min = std::min(curve.s_min, nrm / std::abs(noise));
            id.step(phi, traj.y[t - 1]);
            curve.mean_sq[t] += (id.candidates()[0].w_hat - w_true).squaredNorm();
        }
    }
    for (auto& v : curve.mean_sq) v /= realizations;
    return curve;
}

Diagnostics assumption_diagnostics(const Trajectory& traj, const SystemOrder& orders,
                                   int window_r, int stride, const SarxSystem* truth) {
    traj.validate();
    orders.validate();
    if (window_r < 1) throw ConfigError("diagnostics: window_r must be >= 1");
    if (stride < 1) throw ConfigError("diagnostics: stride must be >= 1");

    const int T = traj.T();
    const int n = orders.n();
    Diagnostics diag;

    std::vector<VectorXd> phis;
    phis.reserve(T);
    for (int t = 1; t <= T; ++t) phis.push_back(regressor_at(traj, t, orders));

    for (int t = 0; t < T; ++t) {
        double nrm = phis[t].norm();
        diag.phi_max = std::max(diag.phi_max, nrm);
        double noise = traj.noise[t];
        if (noise != 0.0 && nrm > 0.0) {
            double snr = nrm / std::abs(noise);
            diag.s_min = diag.s_min ? std::min(*diag.s_min, snr) : snr;
            diag.s_max = diag.s_max ? std::max(*diag.s_max, snr) : snr;
        }
        if (truth && nrm > 0.0) {
            int mode = traj.modes[t];
            if (mode >= 1 && mode <= truth->m()) {
                const VectorXd& w_true = truth->subsystems[mode - 1];
                for (int j = 0; j < truth->m(); ++j) {
                    if (j == mode - 1) continue;
                    double margin = std::abs((truth->subsystems[j] - w_true).dot(phis[t]));
                    diag.psi = diag.psi ? std::min(*diag.psi, margin) : margin;
                }
            }
        }
    }

    for (int t0 = 0; t0 + window_r <= T; t0 += stride) {
        MatrixXd G = MatrixXd::Zero(n, n);
        for (int i = 0; i < window_r; ++i) G += phis[t0 + i] * phis[t0 + i].transpose();
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G, Eigen::EigenvaluesOnly);
        diag.sigma_min = std::min(diag.sigma_min, std::sqrt(std::max(0.0, eig.eigenvalues()(0))));
        diag.sigma_max = std::max(diag.sigma_max, std::sqrt(std::max(0.0, eig.eigenvalues()(n - 1))));
    }
    return diag;
}

namespace {

void append_g17(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

}  // namespace

void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    os << "setup,noise,fe_ours,fe_base,cer_ours,cer_base,failed\n";
    for (const auto& row : rows) {
        std::string line = row.setup;
        for (double v : {row.noise, row.fe_ours, row.fe_base, row.cer_ours, row.cer_base}) {
            line += ',';
            append_g17(line, v);
        }
        line += ',';
        line += std::to_string(row.failed);
        line += '\n';
        os << line;
    }
}

void write_experiment_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_experiment_csv(os, rows);
    if (!os) throw Error("write failed: " + path);
}

}  // namespace sarx
