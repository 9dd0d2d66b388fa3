#pragma once

#include <optional>
#include <vector>

#include "sarx/types.hpp"

namespace sarx {

// Spectral summary of the update window: sigma_min/sigma_max are singular
// value extremes of the n x window_r data matrix, the rest follow in closed
// form from interlacing. kappa_max governs the worst-case contraction rate,
// xi_min the best case; F_min/F_max bracket the Frobenius norm.
struct SpectralConstants {
    int n = 0;
    int window_r = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double f_min = 0.0;
    double f_max = 0.0;
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    double xi_min = 0.0;
    double xi_max = 0.0;
};

SpectralConstants spectral_constants(double sigma_min, double sigma_max, int n, int window_r);

// Same constants from regressor correlation eigenvalue extremes, using
// sigma^2 ~ window_r * lambda for a full window of stationary data.
SpectralConstants constants_from_correlation(double lambda_min, double lambda_max, int n,
                                             int window_r);

// Expected squared-error envelopes for a single-subsystem run, evaluated at
// update counts r = window_r .. steps. The upper curve starts from
// eps0_sq_expect + (window_r - 1) / s_min^2, the lower one from the noise
// floor sigma_n^2 / phi_max^2. gamma_tilde = gamma / (1 - gamma) skews both
// envelopes when the sampler uses a forgetting factor (1 = plain sampling).
struct BoundCurves {
    std::vector<int> r;
    std::vector<double> lower;
    std::vector<double> upper;
    double lower_asymptote = 0.0;
    double upper_asymptote = 0.0;
};

BoundCurves partial_bound_curves(const SpectralConstants& sc, double sigma_n, double s_min,
                                 double phi_max, double eps0_sq_expect, int steps,
                                 double gamma_tilde = 1.0);

// Stationary covariance of [y_{t-1}, y_{t-2}, u_{t-1}] for the second-order
// subsystem y_t = a1 y_{t-1} + a2 y_{t-2} + c1 u_{t-1} + n_t with white
// gaussian u and n. Throws PoleDegeneracy near marginal stability.
struct CorrelationSummary {
    MatrixXd R;                  // 3 x 3
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::vector<double> eigenvalues;  // all three, ascending
};

CorrelationSummary correlation_matrix_order3(double a1, double a2, double c1, double sigma_u,
                                             double sigma_n);

// Same eigenvalues expressed through the subsystem poles (noise-free form).
struct PoleEigenvalues {
    double lambda1 = 0.0;  // c1 sigma_u^2 / ((1 - p1 p2)(1 - p1)(1 - p2))
    double lambda2 = 0.0;  // c1 sigma_u^2 / ((1 - p1 p2)(1 + p1)(1 + p2))
    double lambda3 = 0.0;  // sigma_u^2
};

PoleEigenvalues order3_eigenvalues_from_poles(double p1, double p2, double c1, double sigma_u);

// Lower bound on the correlation condition number as poles approach +1.
double condition_lower_bound(double p1, double p2);

// Radius of the basin inside which correct assignment is self-sustaining:
// (psi - n_max / (nu s_min) - 3 n_max) / (2 phi_max). Not applicable when
// the margin psi is overwhelmed by the noise terms.
struct LocalRadius {
    double value = 0.0;
    bool applicable = false;
};

LocalRadius local_radius(double psi, double phi_max, double n_max, double nu, double s_min);

// Probability that every datum is assigned correctly when all candidates
// start within eps0 of their targets. s_min absent means noiseless data.
struct LocalSuccess {
    double probability = 0.0;   // clamped to [0, 1]
    bool precondition_ok = false;
};

LocalSuccess local_success_probability(int m, int window_r, double eps0,
                                       std::optional<double> s_min, double eps_prime);

}  // namespace sarx
