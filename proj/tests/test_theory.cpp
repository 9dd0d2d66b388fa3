#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sarx/theory.hpp"

using namespace sarx;

TEST_CASE("isotropic windows give the square-root-n constants") {
    SpectralConstants sc = spectral_constants(2.0, 2.0, 4, 16);
    const double root = std::sqrt(4.0);
    CHECK(sc.kappa_max == doctest::Approx(root));
    CHECK(sc.kappa_min == doctest::Approx(root));
    CHECK(sc.xi_min == doctest::Approx(root));
    CHECK(sc.xi_max == doctest::Approx(root));
    CHECK(sc.f_min == doctest::Approx(2.0 * root));
    CHECK(sc.f_max == doctest::Approx(2.0 * root));
}

TEST_CASE("anisotropic constants interpolate by interlacing") {
    SpectralConstants sc = spectral_constants(1.0, 2.0, 3, 9);
    // Worst case: two directions at sigma_max, one at sigma_min.
    CHECK(sc.kappa_max == doctest::Approx(3.0));
    CHECK(sc.xi_min == doctest::Approx(std::sqrt(1.5)));
    CHECK(sc.kappa_min == doctest::Approx(std::sqrt(3.0)));
    CHECK(sc.xi_max == doctest::Approx(std::sqrt(3.0)));
    CHECK(sc.f_min == doctest::Approx(std::sqrt(3.0)));
    CHECK(sc.f_max == doctest::Approx(2.0 * std::sqrt(3.0)));

    CHECK_THROWS_AS(spectral_constants(0.0, 1.0, 3, 9), ConfigError);
    CHECK_THROWS_AS(spectral_constants(2.0, 1.0, 3, 9), ConfigError);
    CHECK_THROWS_AS(spectral_constants(1.0, 2.0, 3, 2), ConfigError);
}

TEST_CASE("correlation route agrees with the direct spectral formulas") {
    const double lmin = 0.6, lmax = 2.7;
    const int n = 3, nr = 10;
    SpectralConstants sc = constants_from_correlation(lmin, lmax, n, nr);
    // The window scaling cancels inside every ratio.
    CHECK(sc.kappa_max ==
          doctest::Approx(std::sqrt(((n - 1) * lmax + lmin) / lmin)).epsilon(1e-12));
    CHECK(sc.xi_min ==
          doctest::Approx(std::sqrt((lmax + (n - 1) * lmin) / lmax)).epsilon(1e-12));
    CHECK(sc.f_min == doctest::Approx(std::sqrt(n * nr * lmin)).epsilon(1e-12));
    CHECK(sc.sigma_min == doctest::Approx(std::sqrt(nr * lmin)).epsilon(1e-12));
}

TEST_CASE("second-order stationary covariance matches the published numbers") {
    CorrelationSummary cs = correlation_matrix_order3(0.7, -0.12, 1.0, 1.0, 0.0);
    CHECK(cs.R(0, 0) == doctest::Approx(1.665).epsilon(0.005));
    CHECK(cs.R(0, 1) == doctest::Approx(1.041).epsilon(0.005));
    CHECK(cs.R(1, 1) == cs.R(0, 0));
    CHECK(cs.R(2, 2) == 1.0);
    CHECK(cs.R(0, 2) == 0.0);

    REQUIRE(cs.eigenvalues.size() == 3);
    CHECK(cs.eigenvalues[0] == doctest::Approx(0.6244).epsilon(0.001));
    CHECK(cs.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(cs.eigenvalues[2] == doctest::Approx(2.7056).epsilon(0.001));
    CHECK(cs.lambda_min == cs.eigenvalues[0]);
    CHECK(cs.lambda_max == cs.eigenvalues[2]);
}

TEST_CASE("closed-form eigenvalues agree with a numeric eigensolver") {
    for (auto [a1, a2] : {std::pair{0.7, -0.12}, {0.2, 0.24}, {-1.4, -0.53}, {1.7, -0.72}}) {
        CorrelationSummary cs = correlation_matrix_order3(a1, a2, 1.0, 1.0, 0.01);
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cs.R, Eigen::EigenvaluesOnly);
        for (int i = 0; i < 3; ++i)
            CHECK(cs.eigenvalues[i] == doctest::Approx(eig.eigenvalues()(i)).epsilon(1e-10));
    }
}

TEST_CASE("pole and coefficient eigenvalue forms coincide") {
    // a1 = 0.7, a2 = -0.12 factors as poles 0.4 and 0.3.
    CorrelationSummary cs = correlation_matrix_order3(0.7, -0.12, 1.0, 1.0, 0.0);
    PoleEigenvalues pe = order3_eigenvalues_from_poles(0.4, 0.3, 1.0, 1.0);
    CHECK(pe.lambda1 == doctest::Approx(cs.lambda_max).epsilon(1e-12));
    CHECK(pe.lambda2 == doctest::Approx(cs.lambda_min).epsilon(1e-12));
    CHECK(pe.lambda3 == 1.0);

    PoleEigenvalues single = order3_eigenvalues_from_poles(0.9, 0.0, 1.0, 1.0);
    CHECK(single.lambda1 == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(single.lambda2 == doctest::Approx(1.0 / 1.9).epsilon(1e-12));

    CHECK_THROWS_AS(order3_eigenvalues_from_poles(1.0, 0.5, 1.0, 1.0), PoleDegeneracy);
}

TEST_CASE("conditioning deteriorates as poles approach the unit circle") {
    CHECK(condition_lower_bound(0.5, 0.5) == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(condition_lower_bound(0.0, 0.0) == doctest::Approx(1.0));
    double prev = 0.0;
    for (double p : {0.5, 0.9, 0.99, 0.999}) {
        double c = condition_lower_bound(p, p);
        CHECK(c > prev);
        prev = c;
    }
    CHECK(prev > 1e8);
    CHECK_THROWS_AS(condition_lower_bound(1.0, 0.0), PoleDegeneracy);
}

TEST_CASE("marginally stable coefficients are rejected") {
    // a1 + a2 = 1 puts a pole at +1.
    CHECK_THROWS_AS(correlation_matrix_order3(0.5, 0.5, 1.0, 1.0, 0.0), PoleDegeneracy);
    // An unstable pair has no positive definite stationary covariance.
    CHECK_THROWS_AS(correlation_matrix_order3(0.0, -1.5, 1.0, 1.0, 0.0), PoleDegeneracy);
}

TEST_CASE("published benchmark constants come out as printed") {
    CorrelationSummary cs = correlation_matrix_order3(0.7, -0.12, 1.0, 1.0, 0.0);
    SpectralConstants sc = constants_from_correlation(cs.lambda_min, cs.lambda_max, 3, 10);
    CHECK(sc.kappa_max == doctest::Approx(3.109).epsilon(0.001));
    CHECK(sc.f_min * sc.f_min == doctest::Approx(18.73).epsilon(0.001));

    // Steady-state upper envelope scales the noise variance by about 5.16.
    BoundCurves curves = partial_bound_curves(sc, 1.0, 1e6, 10.0, 1.0, 200);
    CHECK(curves.upper_asymptote == doctest::Approx(5.161).epsilon(0.001));
}

TEST_CASE("envelopes follow the one-step recursion they summarize") {
    SpectralConstants sc = spectral_constants(1.0, 2.0, 3, 9);
    const double sigma_n = 0.05, s_min = 40.0, phi_max = 3.0, eps0_sq = 2.0;
    BoundCurves curves = partial_bound_curves(sc, sigma_n, s_min, phi_max, eps0_sq, 60);
    REQUIRE(curves.r.front() == 9);
    REQUIRE(curves.r.back() == 60);
    REQUIRE(curves.r.size() == 52);

    const double up_rate = 1.0 - 1.0 / (sc.kappa_max * sc.kappa_max);
    const double up_noise = 9.0 * sigma_n * sigma_n / (sc.f_min * sc.f_min);
    const double low_rate = 1.0 - 1.0 / (sc.xi_min * sc.xi_min);
    const double low_noise = 9.0 * sigma_n * sigma_n / (sc.f_max * sc.f_max);

    double up = eps0_sq + 8.0 / (s_min * s_min);
    double low = sigma_n * sigma_n / (phi_max * phi_max);
    for (std::size_t k = 0; k < curves.r.size(); ++k) {
        up = up_rate * up + up_noise;
        low = low_rate * low + low_noise;
        CHECK(curves.upper[k] == doctest::Approx(up).epsilon(1e-12));
        CHECK(curves.lower[k] == doctest::Approx(low).epsilon(1e-12));
        CHECK(curves.lower[k] <= curves.upper[k]);
    }
    CHECK(curves.upper_asymptote == doctest::Approx(up_noise / (1.0 - up_rate)).epsilon(1e-12));
}

TEST_CASE("noiseless envelopes decay geometrically to zero") {
    SpectralConstants sc = spectral_constants(1.0, 1.5, 3, 10);
    BoundCurves curves = partial_bound_curves(
        sc, 0.0, std::numeric_limits<double>::infinity(), 1.0, 0.25, 80);
    CHECK(curves.upper_asymptote == 0.0);
    CHECK(curves.lower_asymptote == 0.0);
    CHECK(curves.upper.front() < 0.25);  // one contraction already applied
    const double rate = 1.0 - 1.0 / (sc.kappa_max * sc.kappa_max);
    for (std::size_t k = 1; k < curves.upper.size(); ++k) {
        CHECK(curves.upper[k] == doctest::Approx(curves.upper[k - 1] * rate).epsilon(1e-12));
        CHECK(curves.lower[k] == 0.0);
    }
    CHECK(curves.upper.back() < 0.25 * 1e-3);
}

TEST_CASE("forgetting skews both envelopes upward") {
    SpectralConstants sc = spectral_constants(1.0, 2.0, 3, 9);
    BoundCurves plain = partial_bound_curves(sc, 0.1, 50.0, 2.0, 1.0, 40, 1.0);
    BoundCurves skewed = partial_bound_curves(sc, 0.1, 50.0, 2.0, 1.0, 40, 3.0);
    CHECK(skewed.upper_asymptote > plain.upper_asymptote);
    for (std::size_t k = 0; k < plain.upper.size(); ++k)
        CHECK(skewed.upper[k] >= plain.upper[k] - 1e-15);

    CHECK_THROWS_AS(partial_bound_curves(sc, 0.1, 50.0, 2.0, 1.0, 40, 0.9), ConfigError);
    CHECK_THROWS_AS(partial_bound_curves(sc, 0.1, 50.0, 2.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(partial_bound_curves(sc, -0.1, 50.0, 2.0, 1.0, 40), ConfigError);
}

TEST_CASE("assignment basin radius subtracts the noise penalties") {
    LocalRadius clean = local_radius(0.5, 1.0, 0.0, 1e-4, 1.0);
    CHECK(clean.value == doctest::Approx(0.25));
    CHECK(clean.applicable);

    // penalty = n_max / (nu s_min) + 3 n_max = 0.008 + 0.012 = 0.02
    LocalRadius noisy = local_radius(0.5, 1.0, 0.004, 0.5, 1.0);
    CHECK(noisy.value == doctest::Approx(0.24));
    CHECK(noisy.applicable);

    LocalRadius swamped = local_radius(0.01, 1.0, 0.1, 0.5, 1.0);
    CHECK_FALSE(swamped.applicable);

    CHECK_THROWS_AS(local_radius(0.5, 0.0, 0.0, 1e-4, 1.0), ConfigError);
    CHECK_THROWS_AS(local_radius(0.5, 1.0, 0.1, 0.0, 1.0), ConfigError);
}

TEST_CASE("success probability is linear in the initial spread, then clamps") {
    // spread = sqrt(window_r * eps0^2) = 0.04, one candidate pair term.
    LocalSuccess s = local_success_probability(1, 4, 0.02, std::nullopt, 1.0);
    CHECK(s.probability == doctest::Approx(0.92));
    CHECK(s.precondition_ok);

    LocalSuccess sure = local_success_probability(3, 10, 0.0, std::nullopt, 0.5);
    CHECK(sure.probability == 1.0);

    LocalSuccess hopeless = local_success_probability(2, 10, 5.0, std::nullopt, 0.1);
    CHECK(hopeless.probability == 0.0);
    CHECK_FALSE(hopeless.precondition_ok);

    // The noise floor enters through s_min even with a perfect start.
    LocalSuccess noisy = local_success_probability(1, 4, 0.0, 10.0, 1.0);
    CHECK(noisy.probability == doctest::Approx(1.0 - 2.0 * std::sqrt(4.0 * 0.04)).epsilon(1e-12));

    CHECK_THROWS_AS(local_success_probability(0, 4, 0.1, std::nullopt, 1.0), ConfigError);
    CHECK_THROWS_AS(local_success_probability(1, 4, 0.1, std::nullopt, 0.0), ConfigError);
}
