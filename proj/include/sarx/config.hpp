#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sarx/identify.hpp"
#include "sarx/model.hpp"
#include "sarx/types.hpp"

namespace sarx {

// Run configuration, read from a single JSON file. Parsing is strict: any
// key the schema does not know is rejected, with its full path named.

struct SystemConfig {
    SystemOrder orders;
    std::vector<VectorXd> subsystems;  // empty when random_poles is set
    bool random_poles = false;
    int random_m = 0;
    double random_c1 = 1.0;

    [[nodiscard]] int m() const {
        return random_poles ? random_m : static_cast<int>(subsystems.size());
    }
    // Concrete system; draws the pole configuration from `seed` if random.
    [[nodiscard]] SarxSystem materialize(std::uint64_t seed) const;
};

struct ExperimentConfig {
    int realizations = 1;
    std::optional<int> horizon;  // default: top-level horizon
    std::vector<std::string> patterns = {"ss", "md", "fs"};
    std::vector<double> noise_levels = {1e-1, 1e-2, 1e-3};
    bool baseline = true;
    int ss_block = 500;
    int md_dwell = 30;
    double md_geo_p = 1.0 / 16;
};

struct TheoryFromSingularValues {
    double sigma_min = 0.0, sigma_max = 0.0;
};
struct TheoryFromCorrelation {
    double lambda_min = 0.0, lambda_max = 0.0;
};
struct TheoryFromOrder2 {
    double a1 = 0.0, a2 = 0.0, c1 = 1.0, sigma_u = 1.0, sigma_n = 0.0;
};
using TheorySource =
    std::variant<TheoryFromSingularValues, TheoryFromCorrelation, TheoryFromOrder2>;

struct TheoryCurvesConfig {
    double sigma_n = 0.0;
    double s_min = std::numeric_limits<double>::infinity();
    double phi_max = 1.0;
    double eps0_sq = 0.0;
    int steps = 0;
    std::optional<double> gamma;  // forgetting factor; curves use gamma/(1-gamma)
};

struct TheoryLocalConfig {
    int m = 1;
    double eps0 = 0.0;
    double psi = 0.0;
    double phi_max = 1.0;
    double n_max = 0.0;
    double nu = 1e-4;
    std::optional<double> s_min;
};

struct TheoryConfig {
    int n = 0;
    int window_r = 0;
    TheorySource source;
    std::optional<TheoryCurvesConfig> curves;
    std::optional<TheoryLocalConfig> local;
};

struct OutputConfig {
    std::string directory = ".";
    bool trace = false;  // also write the per-step bound trace
};

struct RunConfig {
    std::optional<SystemConfig> system;
    NoiseModel noise;
    double input_std = 1.0;
    std::optional<SwitchingPattern> switching;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::optional<IdentifierConfig> identifier;  // orders filled from system
    std::optional<ExperimentConfig> experiment;
    std::optional<TheoryConfig> theory;
    OutputConfig output;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace sarx
