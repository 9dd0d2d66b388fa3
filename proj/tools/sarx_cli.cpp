// Command line front end. One JSON config per run; flags only pick the seed,
// the output directory, the thread count and (for identify) a prerecorded
// trajectory. Exit codes: 0 ok, 2 bad config or usage, 3 runtime/input
// failure, 4 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>

#include "sarx/config.hpp"
#include "sarx/errors.hpp"
#include "sarx/eval.hpp"
#include "sarx/identify.hpp"
#include "sarx/model.hpp"
#include "sarx/rng.hpp"
#include "sarx/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sarx;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitNumerical = 4;

struct Args {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::string trajectory;
    int threads = 1;
};

RunConfig load(const Args& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        if (cfg.identifier) cfg.identifier->seed = derive_seed(cfg.seed, "ident");
    }
    if (args.output) cfg.output.directory = *args.output;
    return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output.directory);
    fs::create_directories(dir);
    return dir;
}

json vector_to_json(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json bound_to_json(const ErrorBound& b) {
    if (b.is_unbounded()) return "inf";
    return b.value();
}

Trajectory simulate_from_config(const RunConfig& cfg, const SarxSystem& system) {
    if (!cfg.switching) throw ConfigError("config: $.switching: missing (needed to simulate)");
    if (cfg.horizon < 1) throw ConfigError("config: $.horizon: must be >= 1 to simulate");
    SimulationOptions opts;
    opts.pattern = *cfg.switching;
    opts.noise = cfg.noise;
    opts.input_std = cfg.input_std;
    opts.T = cfg.horizon;
    opts.seed = derive_seed(cfg.seed, "sim");
    return simulate(system, opts);
}

SarxSystem system_from_config(const RunConfig& cfg) {
    if (!cfg.system) throw ConfigError("config: $.system: missing");
    return cfg.system->materialize(derive_seed(cfg.seed, "system"));
}

int cmd_simulate(const Args& args) {
    RunConfig cfg = load(args);
    SarxSystem system = system_from_config(cfg);
    Trajectory traj = simulate_from_config(cfg, system);
    fs::path dir = out_dir(cfg);
    write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    std::printf("%s: T=%d, m=%d subsystems, n=%d\n", (dir / "trajectory.csv").c_str(),
                traj.T(), system.m(), system.orders.n());
    return 0;
}

int cmd_identify(const Args& args) {
    RunConfig cfg = load(args);
    if (!cfg.identifier) throw ConfigError("config: $.identifier: missing");

    std::optional<SarxSystem> truth;
    if (cfg.system) truth = system_from_config(cfg);

    Trajectory traj;
    if (!args.trajectory.empty()) {
        traj = read_trajectory_csv(args.trajectory);
    } else {
        if (!truth) throw ConfigError("config: $.system: missing (no --trajectory given)");
        traj = simulate_from_config(cfg, *truth);
    }

    Identifier id(*cfg.identifier);
    std::vector<StepRecord> records = run(id, traj, truth ? &*truth : nullptr);

    fs::path dir = out_dir(cfg);
    write_step_records_csv((dir / "records.csv").string(), records, cfg.identifier->m);
    if (cfg.output.trace && cfg.identifier->bounds_enabled())
        write_bound_trace_csv((dir / "bound_trace.csv").string(), records, *cfg.identifier);

    json summary;
    summary["steps"] = records.size();
    summary["skipped"] = id.skipped_steps();
    summary["baseline"] = !cfg.identifier->bounds_enabled();
    json est = json::array(), counts = json::array(), bounds = json::array();
    std::vector<VectorXd> estimates;
    for (const Candidate& cand : id.candidates()) {
        estimates.push_back(cand.w_hat);
        est.push_back(vector_to_json(cand.w_hat));
        counts.push_back(cand.c);
        bounds.push_back(bound_to_json(cand.eps_u));
    }
    summary["estimates"] = est;
    summary["update_counts"] = counts;
    summary["bounds"] = bounds;

    if (truth && truth->m() <= static_cast<int>(estimates.size())) {
        std::vector<int> h = relabel(estimates, truth->subsystems);
        Metrics metrics = compute_metrics(records, *truth, estimates, h);
        json hj = json::array();
        for (int c : h) hj.push_back(c + 1);
        summary["metrics"] = {{"fe", metrics.fe}, {"cer", metrics.cer}, {"assignment", hj}};
        std::printf("FE=%.6g CER=%.6g over %zu steps (%lld skipped)\n", metrics.fe,
                    metrics.cer, records.size(), id.skipped_steps());
    } else {
        std::printf("%zu steps (%lld skipped), no ground truth\n", records.size(),
                    id.skipped_steps());
    }

    std::ofstream os(dir / "summary.json");
    if (!os) throw Error("cannot write " + (dir / "summary.json").string());
    os << summary.dump(2) << '\n';
    return 0;
}

int cmd_experiment(const Args& args) {
    RunConfig cfg = load(args);
    if (!cfg.experiment) throw ConfigError("config: $.experiment: missing");
    if (!cfg.identifier) throw ConfigError("config: $.identifier: missing");
    if (!cfg.system) throw ConfigError("config: $.system: missing");
    const ExperimentConfig& ex = *cfg.experiment;
    const int horizon = ex.horizon.value_or(cfg.horizon);
    if (horizon < 1) throw ConfigError("config: experiment horizon must be >= 1");
    if (cfg.noise.kind == NoiseKind::None)
        throw ConfigError(
            "config: $.noise.kind: experiment sweeps noise levels, use gaussian or "
            "truncated-gaussian");

    fs::path dir = out_dir(cfg);
    std::vector<ExperimentRow> rows;
    json cells = json::array();
    int cell_index = 0;
    for (const std::string& pattern : ex.patterns) {
        for (double level : ex.noise_levels) {
            RealizationPlan plan;
            if (cfg.system->random_poles) {
                plan.random_system = true;
                plan.random_m = cfg.system->random_m;
                plan.random_c1 = cfg.system->random_c1;
            } else {
                plan.system = cfg.system->materialize(0);
            }
            if (pattern == "ss")
                plan.pattern = SlowSwitching{ex.ss_block};
            else if (pattern == "md")
                plan.pattern = MinDwellSwitching{ex.md_dwell, ex.md_geo_p};
            else
                plan.pattern = FastSwitching{};
            plan.noise.kind = cfg.noise.kind;
            plan.noise.sigma = level;
            if (plan.noise.kind == NoiseKind::TruncatedGaussian) plan.noise.n_max = 3 * level;
            plan.input_std = cfg.input_std;
            plan.T = horizon;
            plan.identifier = *cfg.identifier;
            if (std::isfinite(plan.noise.bound()))
                plan.identifier.n_max = plan.noise.bound();
            if (auto* mc = std::get_if<BoundMonteCarlo>(&plan.identifier.bound_mode))
                mc->sigma = level;
            plan.compare_baseline = ex.baseline;
            plan.realizations = ex.realizations;
            plan.base_seed = derive_seed(cfg.seed, "cell", cell_index++);

            CellSummary cell = run_realizations(plan, args.threads);
            ExperimentRow row;
            row.setup = pattern;
            row.noise = level;
            row.fe_ours = cell.fe_ours;
            row.fe_base = cell.fe_base;
            row.cer_ours = cell.cer_ours;
            row.cer_base = cell.cer_base;
            row.failed = cell.failed;
            rows.push_back(row);

            json runs = json::array();
            for (const RealizationResult& rr : cell.per_run)
                runs.push_back({{"failed", rr.failed},
                                {"fe_ours", rr.fe_ours},
                                {"cer_ours", rr.cer_ours},
                                {"fe_base", rr.fe_base},
                                {"cer_base", rr.cer_base}});
            cells.push_back({{"setup", pattern}, {"noise", level}, {"per_run", runs}});

            std::printf("%s sigma=%g: FE %.4g vs %.4g, CER %.4g vs %.4g (%d failed)\n",
                        pattern.c_str(), level, row.fe_ours, row.fe_base, row.cer_ours,
                        row.cer_base, row.failed);
            std::fflush(stdout);
        }
    }
    write_experiment_csv((dir / "experiment.csv").string(), rows);
    std::ofstream os(dir / "realizations.json");
    if (!os) throw Error("cannot write " + (dir / "realizations.json").string());
    os << cells.dump(2) << '\n';
    std::printf("%s: %zu cells\n", (dir / "experiment.csv").c_str(), rows.size());
    return 0;
}

int cmd_theory(const Args& args) {
    RunConfig cfg = load(args);
    if (!cfg.theory) throw ConfigError("config: $.theory: missing");
    const TheoryConfig& th = *cfg.theory;

    json out;
    SpectralConstants sc;
    if (const auto* sv = std::get_if<TheoryFromSingularValues>(&th.source)) {
        sc = spectral_constants(sv->sigma_min, sv->sigma_max, th.n, th.window_r);
    } else if (const auto* co = std::get_if<TheoryFromCorrelation>(&th.source)) {
        sc = constants_from_correlation(co->lambda_min, co->lambda_max, th.n, th.window_r);
    } else {
        const auto& o2 = std::get<TheoryFromOrder2>(th.source);
        CorrelationSummary corr =
            correlation_matrix_order3(o2.a1, o2.a2, o2.c1, o2.sigma_u, o2.sigma_n);
        sc = constants_from_correlation(corr.lambda_min, corr.lambda_max, th.n, th.window_r);
        json rj = json::array();
        for (int i = 0; i < 3; ++i) {
            json row = json::array();
            for (int j = 0; j < 3; ++j) row.push_back(corr.R(i, j));
            rj.push_back(row);
        }
        out["correlation"] = {{"R", rj},
                              {"eigenvalues", corr.eigenvalues},
                              {"lambda_min", corr.lambda_min},
                              {"lambda_max", corr.lambda_max}};
        // Real poles admit the closed pole forms and the conditioning bound.
        const double disc = o2.a1 * o2.a1 + 4 * o2.a2;
        if (disc >= 0) {
            const double p1 = (o2.a1 + std::sqrt(disc)) / 2;
            const double p2 = (o2.a1 - std::sqrt(disc)) / 2;
            PoleEigenvalues pe = order3_eigenvalues_from_poles(p1, p2, o2.c1, o2.sigma_u);
            out["correlation"]["poles"] = {p1, p2};
            out["correlation"]["pole_eigenvalues"] = {pe.lambda1, pe.lambda2, pe.lambda3};
            out["correlation"]["condition_lower_bound"] = condition_lower_bound(p1, p2);
        }
    }
    out["constants"] = {{"n", sc.n},           {"window_r", sc.window_r},
                        {"sigma_min", sc.sigma_min}, {"sigma_max", sc.sigma_max},
                        {"f_min", sc.f_min},   {"f_max", sc.f_max},
                        {"kappa_min", sc.kappa_min}, {"kappa_max", sc.kappa_max},
                        {"xi_min", sc.xi_min}, {"xi_max", sc.xi_max}};

    fs::path dir = out_dir(cfg);
    if (th.curves) {
        const TheoryCurvesConfig& cc = *th.curves;
        const double gamma_tilde = cc.gamma ? *cc.gamma / (1 - *cc.gamma) : 1.0;
        BoundCurves curves = partial_bound_curves(sc, cc.sigma_n, cc.s_min, cc.phi_max,
                                                  cc.eps0_sq, cc.steps, gamma_tilde);
        std::ofstream os(dir / "curves.csv");
        if (!os) throw Error("cannot write " + (dir / "curves.csv").string());
        os << "r,lower,upper\n";
        char buf[96];
        for (std::size_t i = 0; i < curves.r.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", curves.r[i], curves.lower[i],
                          curves.upper[i]);
            os << buf;
        }
        out["curves"] = {{"file", "curves.csv"},
                         {"lower_asymptote", curves.lower_asymptote},
                         {"upper_asymptote", curves.upper_asymptote}};
    }
    if (th.local) {
        const TheoryLocalConfig& lc = *th.local;
        const double s_min =
            lc.s_min ? *lc.s_min : std::numeric_limits<double>::infinity();
        LocalRadius radius = local_radius(lc.psi, lc.phi_max, lc.n_max, lc.nu, s_min);
        out["local"] = {{"radius", radius.value}, {"applicable", radius.applicable}};
        if (radius.applicable) {
            LocalSuccess success =
                local_success_probability(lc.m, th.window_r, lc.eps0, lc.s_min, radius.value);
            out["local"]["success_probability"] = success.probability;
            out["local"]["precondition_ok"] = success.precondition_ok;
        }
    }

    std::ofstream os(dir / "theory.json");
    if (!os) throw Error("cannot write " + (dir / "theory.json").string());
    os << out.dump(2) << '\n';
    std::printf("%s: kappa_max=%.6g, xi_min=%.6g\n", (dir / "theory.json").c_str(),
                sc.kappa_max, sc.xi_min);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online switched-system identification toolkit"};
    app.require_subcommand(1);
    Args args;

    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", args.config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        if (with_seed) sub->add_option("--seed", args.seed, "override the config seed");
        sub->add_option("--output,-o", args.output, "override the output directory");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate a trajectory");
    add_common(sim, true);
    CLI::App* ident = app.add_subcommand("identify", "run the identifier over a trajectory");
    add_common(ident, true);
    ident->add_option("--trajectory", args.trajectory, "read this CSV instead of simulating")
        ->check(CLI::ExistingFile);
    CLI::App* exp = app.add_subcommand("experiment", "sweep patterns and noise levels");
    add_common(exp, true);
    exp->add_option("--threads", args.threads, "realizations run in this many threads")
        ->check(CLI::Range(1, 256));
    CLI::App* theo = app.add_subcommand("theory", "evaluate the closed-form predictions");
    add_common(theo, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(args);
        if (ident->parsed()) return cmd_identify(args);
        if (exp->parsed()) return cmd_experiment(args);
        return cmd_theory(args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const InstabilityError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const ExactModeTooLarge& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const IllConditioned& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const PoleDegeneracy& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const DegenerateRegressor& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const InternalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
