#include "sarx/identify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sarx/model.hpp"

namespace sarx {

using nlohmann::json;

void IdentifierConfig::validate() const {
    if (m < 1) throw ConfigError("identifier: m must be >= 1");
    orders.validate();
    const int n = orders.n();
    if (window_r < n)
        throw ConfigError("identifier: update window must be >= regressor length n");
    if (!(alpha > 0)) throw ConfigError("identifier: alpha must be > 0");
    if (!(beta > 0)) throw ConfigError("identifier: beta must be > 0");
    if (!(nu > 0)) throw ConfigError("identifier: nu must be > 0");
    if (n_max < 0) throw ConfigError("identifier: n_max must be >= 0");
    if (!(cond_cap > 1)) throw ConfigError("identifier: cond_cap must be > 1");
    if (gamma && !(*gamma > 0.5 && *gamma < 1.0))
        throw ConfigError("identifier: gamma must be in (0.5, 1)");

    if (const auto* ex = std::get_if<InitExplicit>(&init)) {
        if (static_cast<int>(ex->values.size()) != m)
            throw ConfigError("identifier: explicit init needs one vector per candidate");
        for (const auto& w : ex->values)
            if (w.size() != n) throw ConfigError("identifier: explicit init vector length != n");
    } else if (const auto* g = std::get_if<InitGaussian>(&init)) {
        if (!(g->scale >= 0)) throw ConfigError("identifier: init scale must be >= 0");
    }

    const long long min_window = static_cast<long long>(window_r) * window_r;
    if (const auto* e = std::get_if<BoundExact>(&bound_mode)) {
        if (e->vertex_cap < 1 || e->vertex_cap > 62)
            throw ConfigError("identifier: vertex cap out of range");
        if (window_c < min_window)
            throw ConfigError("identifier: bound window must be >= window_r^2");
        if (window_c > e->vertex_cap) throw ExactModeTooLarge(window_c, e->vertex_cap);
    } else if (const auto* mc = std::get_if<BoundMonteCarlo>(&bound_mode)) {
        if (window_c < min_window)
            throw ConfigError("identifier: bound window must be >= window_r^2");
        McScheduleParams p{mc->zeta1, mc->zeta2, mc->cap};
        mc_sample_schedule(1, p);  // validates the parameters
        if (mc->sigma < 0) throw ConfigError("identifier: mc sigma must be >= 0");
    } else if (const auto* mw = std::get_if<BoundMultiWindow>(&bound_mode)) {
        if (mw->windows.empty())
            throw ConfigError("identifier: multi-window mode needs at least one window");
        if (mw->vertex_cap < 1 || mw->vertex_cap > 62)
            throw ConfigError("identifier: vertex cap out of range");
        for (int w : mw->windows) {
            if (w < min_window)
                throw ConfigError("identifier: every bound window must be >= window_r^2");
            if (w > mw->vertex_cap) throw ExactModeTooLarge(w, mw->vertex_cap);
        }
    }
}

int IdentifierConfig::max_bound_window() const {
    if (std::holds_alternative<BoundDisabled>(bound_mode)) return 0;
    if (const auto* mw = std::get_if<BoundMultiWindow>(&bound_mode)) {
        int best = 0;
        for (int w : mw->windows) best = std::max(best, w);
        return best;
    }
    return window_c;
}

std::vector<int> IdentifierConfig::bound_windows() const {
    if (std::holds_alternative<BoundDisabled>(bound_mode)) return {};
    if (const auto* mw = std::get_if<BoundMultiWindow>(&bound_mode)) return mw->windows;
    return {window_c};
}

VectorXd kaczmarz_update(const VectorXd& w, const VectorXd& phi, double y) {
    double nrm2 = phi.squaredNorm();
    if (nrm2 == 0.0) throw DegenerateRegressor();
    return w - phi * ((w.dot(phi) - y) / nrm2);
}

ScoreSet score_candidates(const VectorXd& phi, double y, const std::vector<Candidate>& cands,
                          double alpha, double beta, double nu) {
    const double phi_norm = phi.norm();
    if (phi_norm == 0.0) throw DegenerateRegressor();
    const int m = static_cast<int>(cands.size());
    if (m == 0) throw ConfigError("score: no candidates");

    ScoreSet out;
    out.residuals.resize(m);
    out.factors.resize(m);
    out.scores.resize(m);
    out.tentative.reserve(m);
    for (int i = 0; i < m; ++i) {
        const Candidate& cand = cands[i];
        out.residuals(i) = std::abs(cand.w_hat.dot(phi) - y) / phi_norm;
        VectorXd tent = kaczmarz_update(cand.w_hat, phi, y);
        double factor = 1.0;
        if (!cand.eps_u.is_unbounded()) {
            double move = (tent - cand.w_hat).norm();
            double ratio = alpha * move / (2.0 * (cand.eps_u.value() + nu));
            if (ratio > 1.0) factor = std::min(std::pow(ratio, beta), 1e250);
        }
        out.factors(i) = factor;
        out.scores(i) = out.residuals(i) * factor;
        out.tentative.push_back(std::move(tent));
    }
    return out;
}

int assign(const VectorXd& scores) {
    if (scores.size() == 0) throw ConfigError("assign: no scores");
    int best = 0;
    for (int i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores(i)))
            throw InternalError("assign: non-finite score at index " + std::to_string(i));
        if (scores(i) < scores(best)) best = i;
    }
    return best;
}

VectorXd column_sampling_weights(const MatrixXd& phi_R, std::optional<double> gamma) {
    const Eigen::Index W = phi_R.cols();
    if (W < 1) throw ConfigError("sampling weights: empty window");
    VectorXd sq = phi_R.colwise().squaredNorm();
    double total = sq.sum();
    if (!(total > 0.0)) throw InternalError("sampling weights: window has zero energy");
    if (!gamma) return sq / total;

    const double g = *gamma;
    double newest = sq(W - 1);
    double denom = g * newest + (1.0 - g) * (total - newest);
    if (!(denom > 0.0)) throw InternalError("sampling weights: degenerate forgetting split");
    VectorXd w(W);
    for (Eigen::Index i = 0; i + 1 < W; ++i) w(i) = (1.0 - g) * sq(i) / denom;
    w(W - 1) = g * newest / denom;
    return w;
}

int sample_window_column(const MatrixXd& phi_R, std::optional<double> gamma, Rng& rng) {
    VectorXd w = column_sampling_weights(phi_R, gamma);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        cum += w(i);
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(w.size() - 1);
}

namespace {

void push_column(MatrixXd& M, const VectorXd& v) {
    for (Eigen::Index j = 0; j + 1 < M.cols(); ++j) M.col(j) = M.col(j + 1);
    M.col(M.cols() - 1) = v;
}

void push_value(VectorXd& x, double v) {
    for (Eigen::Index j = 0; j + 1 < x.size(); ++j) x(j) = x(j + 1);
    x(x.size() - 1) = v;
}

}  // namespace

Identifier::Identifier(IdentifierConfig cfg)
    : cfg_(std::move(cfg)),
      columns_rng_(make_rng(cfg_.seed, "columns")),
      mc_rng_(make_rng(cfg_.seed, "mc")) {
    cfg_.validate();
    const int n = cfg_.orders.n();
    const int maxW = cfg_.max_bound_window();

    Rng init_rng = make_rng(cfg_.seed, "init");
    std::normal_distribution<double> normal(0.0, 1.0);
    cands_.resize(cfg_.m);
    for (int i = 0; i < cfg_.m; ++i) {
        Candidate& cand = cands_[i];
        cand.w_hat = VectorXd::Zero(n);
        if (const auto* g = std::get_if<InitGaussian>(&cfg_.init)) {
            for (int k = 0; k < n; ++k) cand.w_hat(k) = g->scale * normal(init_rng);
        } else if (const auto* ex = std::get_if<InitExplicit>(&cfg_.init)) {
            cand.w_hat = ex->values[i];
        }
        cand.phi_R = MatrixXd::Zero(n, cfg_.window_r);
        cand.y_R = VectorXd::Zero(cfg_.window_r);
        if (maxW > 0) {
            cand.phi_C = MatrixXd::Zero(n, maxW);
            cand.W_C = MatrixXd::Zero(n, maxW);
            cand.h_C = VectorXd::Zero(maxW);
        }
    }
}

StepResult Identifier::step(const VectorXd& phi, double y) {
    if (phi.size() != cfg_.orders.n())
        throw ConfigError("step: regressor length does not match the configured orders");
    if (!phi.allFinite() || !std::isfinite(y))
        throw ConfigError("step: non-finite datum");

    ++steps_;
    StepResult res;
    if (phi.squaredNorm() == 0.0) {
        ++skipped_;
        res.skipped = true;
        return res;
    }

    ScoreSet ss = score_candidates(phi, y, cands_, cfg_.alpha, cfg_.beta, cfg_.nu);
    res.residuals = ss.residuals;
    res.factors = ss.factors;
    res.scores = ss.scores;
    res.chosen = assign(ss.scores);

    Candidate& cand = cands_[res.chosen];
    cand.c += 1;
    push_column(cand.phi_R, phi);
    push_value(cand.y_R, y);

    VectorXd phi_star;
    double y_star;
    if (cand.c < cfg_.window_r) {
        phi_star = phi;
        y_star = y;
    } else {
        int l = sample_window_column(cand.phi_R, cfg_.gamma, columns_rng_);
        res.sampled_column = l;
        phi_star = cand.phi_R.col(l);
        y_star = cand.y_R(l);
    }

    VectorXd w_before = cand.w_hat;
    cand.w_hat = kaczmarz_update(w_before, phi_star, y_star);

    if (cfg_.bounds_enabled()) {
        push_column(cand.phi_C, phi_star);
        push_column(cand.W_C, w_before);
        push_value(cand.h_C, 1.0 / phi_star.squaredNorm());
        res.bound_outcome = update_bound(cand, res);
    }
    res.eps_u_after = cand.eps_u;
    return res;
}

BoundOutcome Identifier::update_bound(Candidate& cand, StepResult& res) {
    const int maxW = cfg_.max_bound_window();
    if (cand.c < maxW) return BoundOutcome::WindowFilling;

    try {
        if (const auto* e = std::get_if<BoundExact>(&cfg_.bound_mode)) {
            BoundComputation bc =
                assemble_bound_system(cand.phi_C, cand.W_C, cand.h_C, cand.w_hat,
                                      cand.w_lag(maxW), cfg_.cond_cap);
            res.cond = bc.cond;
            cand.eps_u = ErrorBound::finite(exact_upper_bound(bc, cfg_.n_max, e->vertex_cap));
        } else if (const auto* mc = std::get_if<BoundMonteCarlo>(&cfg_.bound_mode)) {
            BoundComputation bc =
                assemble_bound_system(cand.phi_C, cand.W_C, cand.h_C, cand.w_hat,
                                      cand.w_lag(maxW), cfg_.cond_cap);
            res.cond = bc.cond;
            McSamples sched = mc_sample_schedule(cand.c, {mc->zeta1, mc->zeta2, mc->cap});
            res.mc_guarantee_void = sched.guarantee_void;
            std::normal_distribution<double> noise(0.0, mc->sigma);
            auto sampler = [&]() {
                VectorXd v(maxW);
                for (int k = 0; k < maxW; ++k) v(k) = mc->sigma > 0 ? noise(mc_rng_) : 0.0;
                return v;
            };
            cand.eps_u = ErrorBound::finite(monte_carlo_upper_bound(bc, sampler, sched.n));
        } else if (const auto* mw = std::get_if<BoundMultiWindow>(&cfg_.bound_mode)) {
            double best = 0.0;
            double worst_cond = 0.0;
            for (int L : mw->windows) {
                BoundComputation bc = assemble_bound_system(
                    cand.phi_C.rightCols(L), cand.W_C.rightCols(L), cand.h_C.tail(L),
                    cand.w_hat, cand.w_lag(L), cfg_.cond_cap);
                worst_cond = std::max(worst_cond, bc.cond);
                best = std::max(best, exact_upper_bound(bc, cfg_.n_max, mw->vertex_cap));
            }
            res.cond = worst_cond;
            cand.eps_u = ErrorBound::finite(best);
        }
    } catch (const IllConditioned& ill) {
        res.cond = ill.cond;
        return BoundOutcome::Stale;
    }
    return BoundOutcome::Updated;
}

std::vector<StepRecord> run(Identifier& id, const Trajectory& traj, const SarxSystem* truth) {
    traj.validate();
    const auto& cfg = id.config();
    std::vector<StepRecord> records;
    records.reserve(traj.T());
    for (int t = 1; t <= traj.T(); ++t) {
        VectorXd phi = regressor_at(traj, t, cfg.orders);
        StepResult res = id.step(phi, traj.y[t - 1]);

        StepRecord rec;
        rec.t = t;
        rec.true_mode = traj.modes[t - 1];
        rec.skipped = res.skipped;
        rec.assigned_mode = res.skipped ? 0 : res.chosen + 1;
        if (!res.skipped) {
            rec.scores.assign(res.scores.data(), res.scores.data() + res.scores.size());
            rec.residuals.assign(res.residuals.data(),
                                 res.residuals.data() + res.residuals.size());
        } else {
            rec.scores.assign(cfg.m, std::numeric_limits<double>::quiet_NaN());
            rec.residuals.assign(cfg.m, std::numeric_limits<double>::quiet_NaN());
        }
        rec.errors.assign(cfg.m, std::numeric_limits<double>::quiet_NaN());
        if (truth) {
            for (int i = 0; i < cfg.m && i < truth->m(); ++i)
                rec.errors[i] = (id.candidates()[i].w_hat - truth->subsystems[i]).norm();
        }
        rec.eps_u = res.eps_u_after;
        rec.bound_outcome = res.bound_outcome;
        rec.cond = res.cond;
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

void append_g17(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

void append_bound(std::string& line, const ErrorBound& b) {
    if (b.is_unbounded())
        line += "inf";
    else
        append_g17(line, b.value());
}

}  // namespace

void write_step_records_csv(std::ostream& os, const std::vector<StepRecord>& records, int m) {
    std::string header = "t,true_mode,assigned_mode";
    for (int i = 1; i <= m; ++i) header += ",score_" + std::to_string(i);
    for (int i = 1; i <= m; ++i) header += ",resid_" + std::to_string(i);
    for (int i = 1; i <= m; ++i) header += ",err_" + std::to_string(i);
    header += ",eps_u_chosen,skipped\n";
    os << header;

    for (const auto& rec : records) {
        std::string line = std::to_string(rec.t);
        line += ',';
        line += std::to_string(rec.true_mode);
        line += ',';
        line += std::to_string(rec.assigned_mode);
        for (const auto* seq : {&rec.scores, &rec.residuals, &rec.errors}) {
            if (static_cast<int>(seq->size()) != m)
                throw InternalError("step record has wrong column count");
            for (double v : *seq) {
                line += ',';
                append_g17(line, v);
            }
        }
        line += ',';
        if (rec.skipped)
            line += "nan";
        else
            append_bound(line, rec.eps_u);
        line += ',';
        line += rec.skipped ? '1' : '0';
        line += '\n';
        os << line;
    }
}

void write_step_records_csv(const std::string& path, const std::vector<StepRecord>& records,
                            int m) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_step_records_csv(os, records, m);
    if (!os) throw Error("write failed: " + path);
}

namespace {

std::string bound_mode_name(const BoundMode& mode) {
    if (std::holds_alternative<BoundExact>(mode)) return "exact";
    if (std::holds_alternative<BoundMonteCarlo>(mode)) return "mc";
    if (std::holds_alternative<BoundMultiWindow>(mode)) return "multi";
    return "none";
}

}  // namespace

void write_bound_trace_csv(std::ostream& os, const std::vector<StepRecord>& records,
                           const IdentifierConfig& cfg) {
    os << "t,candidate,eps_u,true_err,cond,mode\n";
    if (!cfg.bounds_enabled()) return;
    const std::string kind = bound_mode_name(cfg.bound_mode);
    for (const auto& rec : records) {
        if (rec.skipped) continue;
        std::string line = std::to_string(rec.t);
        line += ',';
        line += std::to_string(rec.assigned_mode);
        line += ',';
        append_bound(line, rec.eps_u);
        line += ',';
        double err = rec.errors.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : rec.errors[rec.assigned_mode - 1];
        append_g17(line, err);
        line += ',';
        append_g17(line, rec.cond);
        line += ',';
        switch (rec.bound_outcome) {
            case BoundOutcome::Updated: line += kind; break;
            case BoundOutcome::Stale: line += "stale"; break;
            case BoundOutcome::WindowFilling: line += "filling"; break;
            case BoundOutcome::NotRun: line += "none"; break;
        }
        line += '\n';
        os << line;
    }
}

void write_bound_trace_csv(const std::string& path, const std::vector<StepRecord>& records,
                           const IdentifierConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_bound_trace_csv(os, records, cfg);
    if (!os) throw Error("write failed: " + path);
}

// --- snapshot -------------------------------------------------------------

namespace {

json matrix_to_json(const MatrixXd& M) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) flat.push_back(M(r, c));
    return json(flat);
}

MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw ConfigError("snapshot: matrix size mismatch");
    MatrixXd M(rows, cols);
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = flat[at++];
    return M;
}

json vector_to_json(const VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vector_from_json(const json& j, Eigen::Index size) {
    auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != size)
        throw ConfigError("snapshot: vector size mismatch");
    return Eigen::Map<const VectorXd>(flat.data(), size);
}

json bound_to_json(const ErrorBound& b) {
    if (b.is_unbounded()) return json("inf");
    return json(b.value());
}

ErrorBound bound_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "inf") throw ConfigError("snapshot: bad bound value");
        return ErrorBound::unbounded();
    }
    return ErrorBound::finite(j.get<double>());
}

json config_to_json(const IdentifierConfig& cfg) {
    json j;
    j["m"] = cfg.m;
    j["orders"] = {{"n_a", cfg.orders.n_a}, {"n_c", cfg.orders.n_c}};
    j["window_r"] = cfg.window_r;
    j["window_c"] = cfg.window_c;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["nu"] = cfg.nu;
    j["n_max"] = cfg.n_max;
    if (cfg.gamma)
        j["gamma"] = *cfg.gamma;
    else
        j["gamma"] = nullptr;
    j["cond_cap"] = cfg.cond_cap;
    j["seed"] = cfg.seed;

    if (std::holds_alternative<InitZeros>(cfg.init)) {
        j["init"] = {{"kind", "zeros"}};
    } else if (const auto* g = std::get_if<InitGaussian>(&cfg.init)) {
        j["init"] = {{"kind", "gaussian"}, {"scale", g->scale}};
    } else {
        const auto& ex = std::get<InitExplicit>(cfg.init);
        json vals = json::array();
        for (const auto& v : ex.values) vals.push_back(vector_to_json(v));
        j["init"] = {{"kind", "explicit"}, {"values", vals}};
    }

    if (const auto* e = std::get_if<BoundExact>(&cfg.bound_mode)) {
        j["bound_mode"] = {{"kind", "exact"}, {"vertex_cap", e->vertex_cap}};
    } else if (const auto* mc = std::get_if<BoundMonteCarlo>(&cfg.bound_mode)) {
        j["bound_mode"] = {{"kind", "monte-carlo"}, {"zeta1", mc->zeta1},
                           {"zeta2", mc->zeta2}, {"cap", mc->cap}, {"sigma", mc->sigma}};
    } else if (const auto* mw = std::get_if<BoundMultiWindow>(&cfg.bound_mode)) {
        j["bound_mode"] = {{"kind", "multi-window"}, {"windows", mw->windows},
                           {"vertex_cap", mw->vertex_cap}};
    } else {
        j["bound_mode"] = {{"kind", "disabled"}};
    }
    return j;
}

IdentifierConfig config_from_json(const json& j) {
    IdentifierConfig cfg;
    cfg.m = j.at("m").get<int>();
    cfg.orders.n_a = j.at("orders").at("n_a").get<int>();
    cfg.orders.n_c = j.at("orders").at("n_c").get<int>();
    cfg.window_r = j.at("window_r").get<int>();
    cfg.window_c = j.at("window_c").get<int>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.beta = j.at("beta").get<double>();
    cfg.nu = j.at("nu").get<double>();
    cfg.n_max = j.at("n_max").get<double>();
    if (!j.at("gamma").is_null()) cfg.gamma = j.at("gamma").get<double>();
    cfg.cond_cap = j.at("cond_cap").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();

    const json& init = j.at("init");
    std::string kind = init.at("kind").get<std::string>();
    if (kind == "zeros") {
        cfg.init = InitZeros{};
    } else if (kind == "gaussian") {
        cfg.init = InitGaussian{init.at("scale").get<double>()};
    } else if (kind == "explicit") {
        InitExplicit ex;
        for (const auto& v : init.at("values"))
            ex.values.push_back(vector_from_json(v, cfg.orders.n()));
        cfg.init = ex;
    } else {
        throw ConfigError("snapshot: unknown init kind '" + kind + "'");
    }

    const json& bm = j.at("bound_mode");
    kind = bm.at("kind").get<std::string>();
    if (kind == "exact") {
        cfg.bound_mode = BoundExact{bm.at("vertex_cap").get<int>()};
    } else if (kind == "monte-carlo") {
        cfg.bound_mode = BoundMonteCarlo{bm.at("zeta1").get<double>(),
                                         bm.at("zeta2").get<double>(),
                                         bm.at("cap").get<long long>(),
                                         bm.at("sigma").get<double>()};
    } else if (kind == "multi-window") {
        cfg.bound_mode = BoundMultiWindow{bm.at("windows").get<std::vector<int>>(),
                                          bm.at("vertex_cap").get<int>()};
    } else if (kind == "disabled") {
        cfg.bound_mode = BoundDisabled{};
    } else {
        throw ConfigError("snapshot: unknown bound mode '" + kind + "'");
    }
    return cfg;
}

std::string rng_to_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void rng_from_string(const std::string& s, Rng& rng) {
    std::istringstream is(s);
    is >> rng;
    if (!is) throw ConfigError("snapshot: bad rng state");
}

}  // namespace

std::string Identifier::snapshot() const {
    json j;
    j["format"] = "sarx-identifier-v1";
    j["config"] = config_to_json(cfg_);

    json state;
    state["steps"] = steps_;
    state["skipped"] = skipped_;
    state["columns_rng"] = rng_to_string(columns_rng_);
    state["mc_rng"] = rng_to_string(mc_rng_);

    json cands = json::array();
    for (const auto& cand : cands_) {
        json c;
        c["w_hat"] = vector_to_json(cand.w_hat);
        c["c"] = cand.c;
        c["phi_R"] = matrix_to_json(cand.phi_R);
        c["y_R"] = vector_to_json(cand.y_R);
        c["phi_C"] = matrix_to_json(cand.phi_C);
        c["W_C"] = matrix_to_json(cand.W_C);
        c["h_C"] = vector_to_json(cand.h_C);
        c["eps_u"] = bound_to_json(cand.eps_u);
        cands.push_back(std::move(c));
    }
    state["candidates"] = std::move(cands);
    j["state"] = std::move(state);
    return j.dump(2);
}

Identifier Identifier::restore(const std::string& snapshot_json) {
    json j = json::parse(snapshot_json);
    if (j.at("format").get<std::string>() != "sarx-identifier-v1")
        throw ConfigError("snapshot: unsupported format");

    Identifier id(config_from_json(j.at("config")));
    const json& state = j.at("state");
    id.steps_ = state.at("steps").get<long long>();
    id.skipped_ = state.at("skipped").get<long long>();
    rng_from_string(state.at("columns_rng").get<std::string>(), id.columns_rng_);
    rng_from_string(state.at("mc_rng").get<std::string>(), id.mc_rng_);

    const json& cands = state.at("candidates");
    if (static_cast<int>(cands.size()) != id.cfg_.m)
        throw ConfigError("snapshot: candidate count mismatch");
    const int n = id.cfg_.orders.n();
    const int maxW = id.cfg_.max_bound_window();
    for (int i = 0; i < id.cfg_.m; ++i) {
        const json& c = cands[i];
        Candidate& cand = id.cands_[i];
        cand.w_hat = vector_from_json(c.at("w_hat"), n);
        cand.c = c.at("c").get<long long>();
        cand.phi_R = matrix_from_json(c.at("phi_R"), n, id.cfg_.window_r);
        cand.y_R = vector_from_json(c.at("y_R"), id.cfg_.window_r);
        cand.phi_C = matrix_from_json(c.at("phi_C"), n, maxW);
        cand.W_C = matrix_from_json(c.at("W_C"), n, maxW);
        cand.h_C = vector_from_json(c.at("h_C"), maxW);
        cand.eps_u = bound_from_json(c.at("eps_u"));
    }
    return id;
}

}  // namespace sarx
