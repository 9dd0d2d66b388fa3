#include "sarx/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace sarx {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(path + "." + it.key(), "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& path) {
    if (v.is_string() && v.get<std::string>() == "inf")
        return std::numeric_limits<double>::infinity();
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double get_double(const json& obj, const std::string& path, const char* key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "missing");
    return as_double(*v, path + "." + key);
}

double get_double_or(const json& obj, const std::string& path, const char* key, double def) {
    const json* v = find(obj, key);
    return v ? as_double(*v, path + "." + key) : def;
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

int get_int(const json& obj, const std::string& path, const char* key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "missing");
    return as_int(*v, path + "." + key);
}

int get_int_or(const json& obj, const std::string& path, const char* key, int def) {
    const json* v = find(obj, key);
    return v ? as_int(*v, path + "." + key) : def;
}

bool get_bool_or(const json& obj, const std::string& path, const char* key, bool def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_boolean()) fail(path + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
    const json* v = find(obj, key);
    if (!v) fail(path + "." + key, "missing");
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

SystemConfig parse_system(const json& j, const std::string& path) {
    check_keys(j, path, {"orders", "subsystems", "random_poles"});
    SystemConfig out;

    if (const json* rp = find(j, "random_poles")) {
        if (find(j, "orders") || find(j, "subsystems"))
            fail(path, "random_poles excludes orders/subsystems");
        check_keys(*rp, path + ".random_poles", {"m", "c1"});
        out.random_poles = true;
        out.random_m = get_int(*rp, path + ".random_poles", "m");
        out.random_c1 = get_double_or(*rp, path + ".random_poles", "c1", 1.0);
        if (out.random_m < 1) fail(path + ".random_poles.m", "must be >= 1");
        out.orders = SystemOrder{2, 1};
        return out;
    }

    const json* orders = find(j, "orders");
    if (!orders) fail(path + ".orders", "missing");
    check_keys(*orders, path + ".orders", {"n_a", "n_c"});
    out.orders.n_a = get_int(*orders, path + ".orders", "n_a");
    out.orders.n_c = get_int(*orders, path + ".orders", "n_c");
    out.orders.validate();

    const json* subs = find(j, "subsystems");
    if (!subs) fail(path + ".subsystems", "missing");
    if (!subs->is_array() || subs->empty()) fail(path + ".subsystems", "expected a non-empty array");
    for (std::size_t i = 0; i < subs->size(); ++i) {
        const json& row = (*subs)[i];
        const std::string rp = path + ".subsystems[" + std::to_string(i) + "]";
        if (!row.is_array()) fail(rp, "expected an array of numbers");
        VectorXd w(row.size());
        for (std::size_t k = 0; k < row.size(); ++k)
            w(static_cast<Eigen::Index>(k)) = as_double(row[k], rp);
        if (w.size() != out.orders.n()) fail(rp, "length must equal n_a + n_c");
        out.subsystems.push_back(std::move(w));
    }
    return out;
}

NoiseModel parse_noise(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "sigma", "n_max"});
    NoiseModel out;
    std::string kind = get_string(j, path, "kind");
    if (kind == "none") {
        out.kind = NoiseKind::None;
        if (find(j, "sigma") || find(j, "n_max")) fail(path, "kind 'none' takes no parameters");
    } else if (kind == "gaussian") {
        out.kind = NoiseKind::Gaussian;
        out.sigma = get_double(j, path, "sigma");
        if (find(j, "n_max")) fail(path + ".n_max", "gaussian noise has no bound");
    } else if (kind == "truncated-gaussian") {
        out.kind = NoiseKind::TruncatedGaussian;
        out.sigma = get_double(j, path, "sigma");
        out.n_max = get_double_or(j, path, "n_max", 3.0 * out.sigma);
    } else {
        fail(path + ".kind", "expected none | gaussian | truncated-gaussian");
    }
    out.validate();
    return out;
}

SwitchingPattern parse_switching(const json& j, const std::string& path) {
    std::string pattern = get_string(j, path, "pattern");
    if (pattern == "ss") {
        check_keys(j, path, {"pattern", "block_length"});
        return SlowSwitching{get_int_or(j, path, "block_length", 500)};
    }
    if (pattern == "md") {
        check_keys(j, path, {"pattern", "dwell", "geo_p"});
        return MinDwellSwitching{get_int_or(j, path, "dwell", 30),
                                 get_double_or(j, path, "geo_p", 1.0 / 16)};
    }
    if (pattern == "fs") {
        check_keys(j, path, {"pattern"});
        return FastSwitching{};
    }
    if (pattern == "explicit") {
        check_keys(j, path, {"pattern", "sequence"});
        const json* seq = find(j, "sequence");
        if (!seq || !seq->is_array()) fail(path + ".sequence", "expected an array");
        ExplicitSwitching ex;
        for (std::size_t i = 0; i < seq->size(); ++i)
            ex.sequence.push_back(as_int((*seq)[i], path + ".sequence"));
        return ex;
    }
    fail(path + ".pattern", "expected ss | md | fs | explicit");
}

InitSpec parse_init(const json& j, const std::string& path, int n) {
    std::string kind = get_string(j, path, "kind");
    if (kind == "zeros") {
        check_keys(j, path, {"kind"});
        return InitZeros{};
    }
    if (kind == "gaussian") {
        check_keys(j, path, {"kind", "scale"});
        return InitGaussian{get_double_or(j, path, "scale", 1.0)};
    }
    if (kind == "explicit") {
        check_keys(j, path, {"kind", "values"});
        const json* vals = find(j, "values");
        if (!vals || !vals->is_array()) fail(path + ".values", "expected an array");
        InitExplicit ex;
        for (std::size_t i = 0; i < vals->size(); ++i) {
            const json& row = (*vals)[i];
            const std::string rp = path + ".values[" + std::to_string(i) + "]";
            if (!row.is_array()) fail(rp, "expected an array of numbers");
            VectorXd w(row.size());
            for (std::size_t k = 0; k < row.size(); ++k)
                w(static_cast<Eigen::Index>(k)) = as_double(row[k], rp);
            if (w.size() != n) fail(rp, "length must equal n_a + n_c");
            ex.values.push_back(std::move(w));
        }
        return ex;
    }
    fail(path + ".kind", "expected zeros | gaussian | explicit");
}

BoundMode parse_bound_mode(const json& j, const std::string& path, const NoiseModel& noise) {
    std::string kind = get_string(j, path, "kind");
    if (kind == "exact") {
        check_keys(j, path, {"kind", "vertex_cap"});
        return BoundExact{get_int_or(j, path, "vertex_cap", 24)};
    }
    if (kind == "monte-carlo") {
        check_keys(j, path, {"kind", "zeta1", "zeta2", "cap", "sigma"});
        BoundMonteCarlo mc;
        mc.zeta1 = get_double_or(j, path, "zeta1", 0.99);
        mc.zeta2 = get_double_or(j, path, "zeta2", 0.5);
        mc.cap = get_int_or(j, path, "cap", 20000);
        mc.sigma = get_double_or(j, path, "sigma", noise.sigma);
        return mc;
    }
    if (kind == "multi-window") {
        check_keys(j, path, {"kind", "windows", "vertex_cap"});
        const json* w = find(j, "windows");
        if (!w || !w->is_array() || w->empty())
            fail(path + ".windows", "expected a non-empty array");
        BoundMultiWindow mw;
        for (std::size_t i = 0; i < w->size(); ++i)
            mw.windows.push_back(as_int((*w)[i], path + ".windows"));
        mw.vertex_cap = get_int_or(j, path, "vertex_cap", 24);
        return mw;
    }
    if (kind == "disabled") {
        check_keys(j, path, {"kind"});
        return BoundDisabled{};
    }
    fail(path + ".kind", "expected exact | monte-carlo | multi-window | disabled");
}

IdentifierConfig parse_identifier(const json& j, const std::string& path,
                                  const SystemConfig& system, const NoiseModel& noise,
                                  std::uint64_t seed) {
    check_keys(j, path,
               {"m", "kaczmarz_window", "bound_window", "alpha", "beta", "nu", "n_max",
                "gamma", "init", "bound_mode", "cond_cap"});
    IdentifierConfig cfg;
    cfg.orders = system.orders;
    cfg.m = get_int_or(j, path, "m", system.m());
    cfg.window_r = get_int(j, path, "kaczmarz_window");
    cfg.window_c = get_int_or(j, path, "bound_window", 0);
    cfg.alpha = get_double_or(j, path, "alpha", 4.0);
    cfg.beta = get_double_or(j, path, "beta", 3.0);
    cfg.nu = get_double_or(j, path, "nu", 1e-4);
    cfg.cond_cap = get_double_or(j, path, "cond_cap", 1e12);
    cfg.seed = seed;
    if (const json* g = find(j, "gamma")) cfg.gamma = as_double(*g, path + ".gamma");
    if (const json* init = find(j, "init"))
        cfg.init = parse_init(*init, path + ".init", cfg.orders.n());
    if (const json* bm = find(j, "bound_mode"))
        cfg.bound_mode = parse_bound_mode(*bm, path + ".bound_mode", noise);

    const double noise_bound = noise.bound();
    if (const json* nm = find(j, "n_max"))
        cfg.n_max = as_double(*nm, path + ".n_max");
    else
        cfg.n_max = std::isfinite(noise_bound) ? noise_bound : 0.0;

    const bool needs_bound = std::holds_alternative<BoundExact>(cfg.bound_mode) ||
                             std::holds_alternative<BoundMultiWindow>(cfg.bound_mode);
    if (needs_bound && noise.kind == NoiseKind::Gaussian)
        fail(path, "unbounded gaussian noise requires bound_mode monte-carlo or disabled");
    if (!std::isfinite(cfg.n_max))
        fail(path + ".n_max", "must be finite");
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_experiment(const json& j, const std::string& path) {
    check_keys(j, path, {"realizations", "horizon", "patterns", "noise_levels", "baseline",
                         "ss_block", "md_dwell", "md_geo_p"});
    ExperimentConfig out;
    out.realizations = get_int_or(j, path, "realizations", 1);
    if (out.realizations < 1) fail(path + ".realizations", "must be >= 1");
    if (const json* h = find(j, "horizon")) out.horizon = as_int(*h, path + ".horizon");
    if (const json* p = find(j, "patterns")) {
        if (!p->is_array() || p->empty()) fail(path + ".patterns", "expected a non-empty array");
        out.patterns.clear();
        for (const auto& v : *p) {
            if (!v.is_string()) fail(path + ".patterns", "expected strings");
            std::string s = v.get<std::string>();
            if (s != "ss" && s != "md" && s != "fs")
                fail(path + ".patterns", "expected ss | md | fs, got '" + s + "'");
            out.patterns.push_back(s);
        }
    }
    if (const json* nl = find(j, "noise_levels")) {
        if (!nl->is_array() || nl->empty())
            fail(path + ".noise_levels", "expected a non-empty array");
        out.noise_levels.clear();
        for (const auto& v : *nl)
            out.noise_levels.push_back(as_double(v, path + ".noise_levels"));
    }
    out.baseline = get_bool_or(j, path, "baseline", true);
    out.ss_block = get_int_or(j, path, "ss_block", 500);
    out.md_dwell = get_int_or(j, path, "md_dwell", 30);
    out.md_geo_p = get_double_or(j, path, "md_geo_p", 1.0 / 16);
    return out;
}

TheoryConfig parse_theory(const json& j, const std::string& path) {
    check_keys(j, path, {"n", "window_r", "source", "curves", "local"});
    TheoryConfig out;
    out.n = get_int(j, path, "n");
    out.window_r = get_int(j, path, "window_r");

    const json* src = find(j, "source");
    if (!src) fail(path + ".source", "missing");
    std::string kind = get_string(*src, path + ".source", "kind");
    if (kind == "singular-values") {
        check_keys(*src, path + ".source", {"kind", "sigma_min", "sigma_max"});
        out.source = TheoryFromSingularValues{get_double(*src, path + ".source", "sigma_min"),
                                              get_double(*src, path + ".source", "sigma_max")};
    } else if (kind == "correlation") {
        check_keys(*src, path + ".source", {"kind", "lambda_min", "lambda_max"});
        out.source = TheoryFromCorrelation{get_double(*src, path + ".source", "lambda_min"),
                                           get_double(*src, path + ".source", "lambda_max")};
    } else if (kind == "order2") {
        check_keys(*src, path + ".source", {"kind", "a1", "a2", "c1", "sigma_u", "sigma_n"});
        TheoryFromOrder2 o;
        o.a1 = get_double(*src, path + ".source", "a1");
        o.a2 = get_double(*src, path + ".source", "a2");
        o.c1 = get_double_or(*src, path + ".source", "c1", 1.0);
        o.sigma_u = get_double_or(*src, path + ".source", "sigma_u", 1.0);
        o.sigma_n = get_double_or(*src, path + ".source", "sigma_n", 0.0);
        out.source = o;
    } else {
        fail(path + ".source.kind", "expected singular-values | correlation | order2");
    }

    if (const json* c = find(j, "curves")) {
        check_keys(*c, path + ".curves",
                   {"sigma_n", "s_min", "phi_max", "eps0_sq", "steps", "gamma"});
        TheoryCurvesConfig cc;
        cc.sigma_n = get_double_or(*c, path + ".curves", "sigma_n", 0.0);
        cc.s_min = get_double_or(*c, path + ".curves", "s_min",
                                 std::numeric_limits<double>::infinity());
        cc.phi_max = get_double(*c, path + ".curves", "phi_max");
        cc.eps0_sq = get_double(*c, path + ".curves", "eps0_sq");
        cc.steps = get_int(*c, path + ".curves", "steps");
        if (const json* g = find(*c, "gamma"))
            cc.gamma = as_double(*g, path + ".curves.gamma");
        out.curves = cc;
    }

    if (const json* l = find(j, "local")) {
        check_keys(*l, path + ".local",
                   {"m", "eps0", "psi", "phi_max", "n_max", "nu", "s_min"});
        TheoryLocalConfig lc;
        lc.m = get_int(*l, path + ".local", "m");
        lc.eps0 = get_double(*l, path + ".local", "eps0");
        lc.psi = get_double(*l, path + ".local", "psi");
        lc.phi_max = get_double(*l, path + ".local", "phi_max");
        lc.n_max = get_double_or(*l, path + ".local", "n_max", 0.0);
        lc.nu = get_double_or(*l, path + ".local", "nu", 1e-4);
        if (const json* s = find(*l, "s_min")) lc.s_min = as_double(*s, path + ".local.s_min");
        out.local = lc;
    }
    return out;
}

OutputConfig parse_output(const json& j, const std::string& path) {
    check_keys(j, path, {"directory", "trace"});
    OutputConfig out;
    if (const json* d = find(j, "directory")) {
        if (!d->is_string()) fail(path + ".directory", "expected a string");
        out.directory = d->get<std::string>();
    }
    out.trace = get_bool_or(j, path, "trace", false);
    return out;
}

}  // namespace

SarxSystem SystemConfig::materialize(std::uint64_t seed) const {
    if (random_poles) return random_system_from_poles(random_m, random_c1, seed);
    SarxSystem system;
    system.orders = orders;
    system.subsystems = subsystems;
    system.validate();
    return system;
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid json: ") + e.what());
    }
    check_keys(j, "$", {"system", "noise", "input", "switching", "horizon", "seed",
                        "identifier", "experiment", "theory", "output"});

    RunConfig cfg;
    if (const json* s = find(j, "system")) cfg.system = parse_system(*s, "$.system");
    if (const json* n = find(j, "noise")) cfg.noise = parse_noise(*n, "$.noise");
    if (const json* i = find(j, "input")) {
        check_keys(*i, "$.input", {"sigma"});
        cfg.input_std = get_double(*i, "$.input", "sigma");
        if (cfg.input_std < 0) fail("$.input.sigma", "must be >= 0");
    }
    if (const json* s = find(j, "switching"))
        cfg.switching = parse_switching(*s, "$.switching");
    cfg.horizon = get_int_or(j, "$", "horizon", 0);
    if (cfg.horizon < 0) fail("$.horizon", "must be >= 0");
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_integer()) fail("$.seed", "expected an integer");
        if (!s->is_number_unsigned() && s->get<long long>() < 0)
            fail("$.seed", "must be >= 0");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* id = find(j, "identifier")) {
        if (!cfg.system) fail("$.identifier", "needs a system section (for the orders)");
        cfg.identifier = parse_identifier(*id, "$.identifier", *cfg.system, cfg.noise,
                                          derive_seed(cfg.seed, "ident"));
    }
    if (const json* e = find(j, "experiment")) cfg.experiment = parse_experiment(*e, "$.experiment");
    if (const json* t = find(j, "theory")) cfg.theory = parse_theory(*t, "$.theory");
    if (const json* o = find(j, "output")) cfg.output = parse_output(*o, "$.output");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace sarx
