#include "sarx/theory.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace sarx {

SpectralConstants spectral_constants(double sigma_min, double sigma_max, int n, int window_r) {
    if (!(sigma_min > 0) || !(sigma_max > 0) || sigma_max < sigma_min)
        throw ConfigError("spectral constants: need 0 < sigma_min <= sigma_max");
    if (n < 1) throw ConfigError("spectral constants: n must be >= 1");
    if (window_r < n) throw ConfigError("spectral constants: window_r must be >= n");

    const double lo2 = sigma_min * sigma_min;
    const double hi2 = sigma_max * sigma_max;
    const double root_n = std::sqrt(static_cast<double>(n));

    SpectralConstants sc;
    sc.n = n;
    sc.window_r = window_r;
    sc.sigma_min = sigma_min;
    sc.sigma_max = sigma_max;
    sc.f_min = root_n * sigma_min;
    sc.f_max = root_n * sigma_max;
    sc.kappa_min = root_n;
    sc.kappa_max = std::sqrt(((n - 1) * hi2 + lo2) / lo2);
    sc.xi_min = std::sqrt((hi2 + (n - 1) * lo2) / hi2);
    sc.xi_max = root_n;
    return sc;
}

SpectralConstants constants_from_correlation(double lambda_min, double lambda_max, int n,
                                             int window_r) {
    if (!(lambda_min > 0) || !(lambda_max > 0) || lambda_max < lambda_min)
        throw ConfigError("spectral constants: need 0 < lambda_min <= lambda_max");
    if (window_r < 1) throw ConfigError("spectral constants: window_r must be >= 1");
    return spectral_constants(std::sqrt(window_r * lambda_min),
                              std::sqrt(window_r * lambda_max), n, window_r);
}

BoundCurves partial_bound_curves(const SpectralConstants& sc, double sigma_n, double s_min,
                                 double phi_max, double eps0_sq_expect, int steps,
                                 double gamma_tilde) {
    if (sigma_n < 0) throw ConfigError("bound curves: sigma_n must be >= 0");
    if (!(phi_max > 0)) throw ConfigError("bound curves: phi_max must be > 0");
    if (!(s_min > 0)) throw ConfigError("bound curves: s_min must be > 0");
    if (eps0_sq_expect < 0) throw ConfigError("bound curves: eps0_sq_expect must be >= 0");
    if (steps < sc.window_r) throw ConfigError("bound curves: steps must be >= window_r");
    if (!(gamma_tilde >= 1.0)) throw ConfigError("bound curves: gamma_tilde must be >= 1");

    const double sn2 = sigma_n * sigma_n;
    const double nr = sc.window_r;

    // Per-update contraction and per-update noise injection, worst case
    // (upper) and best case (lower); the closed form is the geometric sum.
    const double up_rate = 1.0 - 1.0 / (gamma_tilde * sc.kappa_max * sc.kappa_max);
    const double up_noise = gamma_tilde * nr * sn2 / (sc.f_min * sc.f_min);
    const double up_init = eps0_sq_expect + (nr - 1.0) / (s_min * s_min);
    const double up_asym = up_noise / (1.0 - up_rate);

    const double low_rate = 1.0 - gamma_tilde / (sc.xi_min * sc.xi_min);
    const double low_noise = nr * sn2 / (gamma_tilde * sc.f_max * sc.f_max);
    const double low_init = sn2 / (phi_max * phi_max);
    const double low_asym = low_noise / (1.0 - low_rate);

    BoundCurves out;
    out.upper_asymptote = up_asym;
    out.lower_asymptote = low_asym;
    const int count = steps - sc.window_r + 1;
    out.r.reserve(count);
    out.lower.reserve(count);
    out.upper.reserve(count);
    for (int r = sc.window_r; r <= steps; ++r) {
        const double k = r - sc.window_r + 1;
        const double up_pow = std::pow(up_rate, k);
        const double low_pow = std::pow(low_rate, k);
        out.r.push_back(r);
        out.upper.push_back(up_pow * up_init + up_asym * (1.0 - up_pow));
        out.lower.push_back(low_pow * low_init + low_asym * (1.0 - low_pow));
    }
    return out;
}

CorrelationSummary correlation_matrix_order3(double a1, double a2, double c1, double sigma_u,
                                             double sigma_n) {
    if (!(sigma_u > 0)) throw ConfigError("correlation: sigma_u must be > 0");
    if (sigma_n < 0) throw ConfigError("correlation: sigma_n must be >= 0");

    const double denom = (a2 + 1.0) * (a1 + a2 - 1.0) * (a1 - a2 + 1.0);
    const double scale = std::abs(sigma_n * sigma_n + c1 * sigma_u * sigma_u);
    if (std::abs(denom) <= 1e-12 * std::max(1.0, scale))
        throw PoleDegeneracy("correlation: marginally stable coefficients (a1 = " +
                             std::to_string(a1) + ", a2 = " + std::to_string(a2) + ")");

    const double c = (sigma_n * sigma_n + c1 * sigma_u * sigma_u) / denom;
    CorrelationSummary out;
    out.R = MatrixXd::Zero(3, 3);
    out.R(0, 0) = (a2 - 1.0) * c;
    out.R(1, 1) = (a2 - 1.0) * c;
    out.R(0, 1) = -a1 * c;
    out.R(1, 0) = -a1 * c;
    out.R(2, 2) = sigma_u * sigma_u;

    out.eigenvalues = {(a2 - 1.0) * c - a1 * c, (a2 - 1.0) * c + a1 * c,
                       sigma_u * sigma_u};
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    out.lambda_min = out.eigenvalues.front();
    out.lambda_max = out.eigenvalues.back();
    if (!(out.lambda_min > 0))
        throw PoleDegeneracy("correlation: covariance is not positive definite");
    return out;
}

PoleEigenvalues order3_eigenvalues_from_poles(double p1, double p2, double c1,
                                              double sigma_u) {
    if (!(sigma_u > 0)) throw ConfigError("pole eigenvalues: sigma_u must be > 0");
    if (std::abs(p1) >= 1.0 || std::abs(p2) >= 1.0)
        throw PoleDegeneracy("pole eigenvalues: poles must lie strictly inside the unit circle");

    const double su2 = sigma_u * sigma_u;
    PoleEigenvalues out;
    out.lambda1 = c1 * su2 / ((1.0 - p1 * p2) * (1.0 - p1) * (1.0 - p2));
    out.lambda2 = c1 * su2 / ((1.0 - p1 * p2) * (1.0 + p1) * (1.0 + p2));
    out.lambda3 = su2;
    return out;
}

double condition_lower_bound(double p1, double p2) {
    if (std::abs(p1) >= 1.0 || std::abs(p2) >= 1.0)
        throw PoleDegeneracy("condition bound: poles must lie strictly inside the unit circle");
    return 1.0 / ((1.0 - p1 * p2) * (1.0 - p1) * (1.0 - p2));
}

LocalRadius local_radius(double psi, double phi_max, double n_max, double nu, double s_min) {
    if (!(phi_max > 0)) throw ConfigError("local radius: phi_max must be > 0");
    if (psi < 0) throw ConfigError("local radius: psi must be >= 0");
    if (n_max < 0) throw ConfigError("local radius: n_max must be >= 0");

    double penalty = 0.0;
    if (n_max > 0) {
        if (!(nu > 0) || !(s_min > 0))
            throw ConfigError("local radius: noisy case needs nu > 0 and s_min > 0");
        penalty = n_max / (nu * s_min) + 3.0 * n_max;
    }
    LocalRadius out;
    out.value = (psi - penalty) / (2.0 * phi_max);
    out.applicable = out.value > 0.0;
    return out;
}

LocalSuccess local_success_probability(int m, int window_r, double eps0,
                                       std::optional<double> s_min, double eps_prime) {
    if (m < 1) throw ConfigError("local success: m must be >= 1");
    if (window_r < 1) throw ConfigError("local success: window_r must be >= 1");
    if (eps0 < 0) throw ConfigError("local success: eps0 must be >= 0");
    if (!(eps_prime > 0)) throw ConfigError("local success: eps_prime must be > 0");
    if (s_min && !(*s_min > 0)) throw ConfigError("local success: s_min must be > 0");

    double mass = eps0 * eps0;
    if (s_min) mass += window_r / (*s_min * *s_min);
    const double spread = std::sqrt(window_r * mass);

    LocalSuccess out;
    out.precondition_ok = spread <= eps_prime;
    double p = 1.0 - 2.0 * m * spread / eps_prime;
    out.probability = std::clamp(p, 0.0, 1.0);
    return out;
}

}  // namespace sarx
