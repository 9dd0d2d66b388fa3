#include "sarx/model.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sarx {

VectorXd build_regressor(const std::vector<double>& y_hist,
                         const std::vector<double>& u_hist,
                         const SystemOrder& orders) {
    orders.validate();
    if (static_cast<int>(y_hist.size()) != orders.n_a)
        throw ConfigError("build_regressor: y history must have exactly n_a entries");
    if (static_cast<int>(u_hist.size()) != orders.n_c)
        throw ConfigError("build_regressor: u history must have exactly n_c entries");
    VectorXd phi(orders.n());
    for (int i = 0; i < orders.n_a; ++i) phi(i) = y_hist[i];
    for (int i = 0; i < orders.n_c; ++i) phi(orders.n_a + i) = u_hist[i];
    return phi;
}

VectorXd regressor_at(const Trajectory& traj, int t, const SystemOrder& orders) {
    orders.validate();
    if (t < 1 || t > traj.T()) throw ConfigError("regressor_at: step out of range");
    VectorXd phi(orders.n());
    for (int k = 0; k < orders.n_a; ++k) {
        int src = t - 1 - k;  // step index of y_{t-1-k}
        phi(k) = src >= 1 ? traj.y[src - 1] : 0.0;
    }
    for (int k = 0; k < orders.n_c; ++k) {
        int src = t - 1 - k;
        phi(orders.n_a + k) = src >= 1 ? traj.u[src - 1] : 0.0;
    }
    return phi;
}

std::vector<int> generate_switching(const SwitchingPattern& pattern, int m, int T,
                                    std::uint64_t seed) {
    if (m < 1) throw ConfigError("switching: m must be >= 1");
    if (T < 0) throw ConfigError("switching: T must be >= 0");
    std::vector<int> modes(T);
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(1, m);

    if (const auto* ss = std::get_if<SlowSwitching>(&pattern)) {
        if (ss->block_length < 1) throw ConfigError("slow switching: block_length must be >= 1");
        for (int t = 0; t < T; ++t) modes[t] = 1 + (t / ss->block_length) % m;
    } else if (const auto* md = std::get_if<MinDwellSwitching>(&pattern)) {
        if (md->dwell < 1) throw ConfigError("min-dwell switching: dwell must be >= 1");
        if (!(md->geo_p > 0.0) || md->geo_p > 1.0)
            throw ConfigError("min-dwell switching: geo_p must be in (0, 1]");
        int t = 0;
        int mode = pick(rng);
        while (t < T) {
            int len = md->dwell + sample_geometric(md->geo_p, rng);
            for (int i = 0; i < len && t < T; ++i) modes[t++] = mode;
            mode = pick(rng);  // next segment; may repeat the current mode
        }
    } else if (std::holds_alternative<FastSwitching>(pattern)) {
        for (int t = 0; t < T; ++t) modes[t] = pick(rng);
    } else {
        const auto& ex = std::get<ExplicitSwitching>(pattern);
        if (static_cast<int>(ex.sequence.size()) < T)
            throw ConfigError("explicit switching: sequence shorter than horizon");
        for (int t = 0; t < T; ++t) {
            int v = ex.sequence[t];
            if (v < 1 || v > m)
                throw ConfigError("explicit switching: mode out of range at step " +
                                  std::to_string(t + 1));
            modes[t] = v;
        }
    }
    return modes;
}

double sample_truncated_gaussian(double sigma, double n_max, Rng& rng) {
    if (sigma == 0.0) return 0.0;
    if (sigma < 0.0) throw ConfigError("truncated gaussian: sigma must be >= 0");
    if (n_max <= 0.0) throw ConfigError("truncated gaussian: n_max must be > 0");
    std::normal_distribution<double> normal(0.0, sigma);
    for (long attempt = 0; attempt < 100000000L; ++attempt) {
        double x = normal(rng);
        if (std::abs(x) <= n_max) return x;
    }
    throw InternalError("truncated gaussian: rejection did not terminate");
}

Trajectory simulate_explicit(const SarxSystem& system, const std::vector<int>& modes,
                             const std::vector<double>& u,
                             const std::vector<double>& noise,
                             double magnitude_cap) {
    system.validate();
    const int T = static_cast<int>(modes.size());
    if (static_cast<int>(u.size()) != T || static_cast<int>(noise.size()) != T)
        throw ConfigError("simulate: modes, u and noise must have equal length");

    Trajectory traj;
    traj.u = u;
    traj.noise = noise;
    traj.modes = modes;
    traj.y.resize(T);

    const auto& orders = system.orders;
    for (int t = 1; t <= T; ++t) {
        int mode = modes[t - 1];
        if (mode < 1 || mode > system.m())
            throw ConfigError("simulate: mode out of range at step " + std::to_string(t));
        VectorXd phi = regressor_at(traj, t, orders);
        double y = system.subsystems[mode - 1].dot(phi) + noise[t - 1];
        if (!std::isfinite(y) || std::abs(y) > magnitude_cap)
            throw InstabilityError(t, y);
        traj.y[t - 1] = y;
    }
    return traj;
}

Trajectory simulate(const SarxSystem& system, const SimulationOptions& opts) {
    system.validate();
    opts.noise.validate();
    if (opts.T < 0) throw ConfigError("simulate: T must be >= 0");
    if (opts.input_std < 0) throw ConfigError("simulate: input_std must be >= 0");

    std::vector<int> modes =
        generate_switching(opts.pattern, system.m(), opts.T, derive_seed(opts.seed, "switching"));

    Rng input_rng = make_rng(opts.seed, "input");
    std::normal_distribution<double> input_dist(0.0, opts.input_std);
    std::vector<double> u(opts.T);
    for (auto& v : u) v = opts.input_std > 0 ? input_dist(input_rng) : 0.0;

    Rng noise_rng = make_rng(opts.seed, "noise");
    std::vector<double> noise(opts.T, 0.0);
    switch (opts.noise.kind) {
        case NoiseKind::None:
            break;
        case NoiseKind::Gaussian: {
            std::normal_distribution<double> dist(0.0, opts.noise.sigma);
            if (opts.noise.sigma > 0)
                for (auto& v : noise) v = dist(noise_rng);
            break;
        }
        case NoiseKind::TruncatedGaussian:
            for (auto& v : noise)
                v = sample_truncated_gaussian(opts.noise.sigma, opts.noise.n_max, noise_rng);
            break;
    }

    return simulate_explicit(system, modes, u, noise, opts.magnitude_cap);
}

SarxSystem random_system_from_poles(int m, double c1, std::uint64_t seed) {
    if (m < 1) throw ConfigError("random system: m must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    SarxSystem system;
    system.orders = SystemOrder{2, 1};
    system.subsystems.reserve(m);
    for (int i = 0; i < m; ++i) {
        double p1 = unif(rng);
        double p2 = unif(rng);
        VectorXd w(3);
        w << p1 + p2, -p1 * p2, c1;
        system.subsystems.push_back(w);
    }
    system.validate();
    return system;
}

std::vector<ChannelProblem> mimo_decompose(const std::vector<MimoSubsystem>& subsystems,
                                           int n_y, int n_u) {
    if (n_y < 1 || n_u < 0) throw ConfigError("mimo: need n_y >= 1 and n_u >= 0");
    if (subsystems.empty()) throw ConfigError("mimo: need at least one subsystem");
    const int n_a = static_cast<int>(subsystems[0].A.size());
    const int n_c = static_cast<int>(subsystems[0].C.size());
    if (n_a + n_c < 1) throw ConfigError("mimo: need at least one lag matrix");
    for (const auto& s : subsystems) {
        if (static_cast<int>(s.A.size()) != n_a || static_cast<int>(s.C.size()) != n_c)
            throw ConfigError("mimo: all subsystems must share the lag counts");
        for (const auto& A : s.A)
            if (A.rows() != n_y || A.cols() != n_y)
                throw ConfigError("mimo: A matrices must be n_y x n_y");
        for (const auto& C : s.C)
            if (C.rows() != n_y || C.cols() != n_u)
                throw ConfigError("mimo: C matrices must be n_y x n_u");
    }

    // Channel i regresses y_{t,i} on [y_{t-1}; ...; y_{t-n_a}; u_{t-1}; ...],
    // so its parameter vector is row i of every lag matrix, stacked.
    std::vector<ChannelProblem> problems(n_y);
    for (int i = 0; i < n_y; ++i) {
        ChannelProblem& p = problems[i];
        p.channel = i;
        p.orders = SystemOrder{n_a * n_y, n_c * n_u};
        for (const auto& s : subsystems) {
            VectorXd w(p.orders.n());
            int at = 0;
            for (const auto& A : s.A)
                for (int j = 0; j < n_y; ++j) w(at++) = A(i, j);
            for (const auto& C : s.C)
                for (int j = 0; j < n_u; ++j) w(at++) = C(i, j);
            p.subsystem_params.push_back(std::move(w));
        }
    }
    return problems;
}

namespace {

void append_double(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    traj.validate();
    os << "t,u,y,mode,noise\n";
    for (int t = 1; t <= traj.T(); ++t) {
        std::string line = std::to_string(t);
        line += ',';
        append_double(line, traj.u[t - 1]);
        line += ',';
        append_double(line, traj.y[t - 1]);
        line += ',';
        line += std::to_string(traj.modes[t - 1]);
        line += ',';
        append_double(line, traj.noise[t - 1]);
        line += '\n';
        os << line;
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_trajectory_csv(os, traj);
    if (!os) throw Error("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, int lineno) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("trajectory csv: bad number '" + s + "' on line " +
                          std::to_string(lineno));
    return v;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,u,y,mode,noise")
        throw ConfigError("trajectory csv: expected header 't,u,y,mode,noise'");

    Trajectory traj;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 5)
            throw ConfigError("trajectory csv: expected 5 columns on line " +
                              std::to_string(lineno));
        int t = static_cast<int>(parse_double(cells[0], lineno));
        if (t != traj.T() + 1)
            throw ConfigError("trajectory csv: steps must be 1,2,... (line " +
                              std::to_string(lineno) + ")");
        traj.u.push_back(parse_double(cells[1], lineno));
        traj.y.push_back(parse_double(cells[2], lineno));
        traj.modes.push_back(static_cast<int>(parse_double(cells[3], lineno)));
        traj.noise.push_back(parse_double(cells[4], lineno));
    }
    return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open: " + path);
    return read_trajectory_csv(is);
}

}  // namespace sarx
