#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dietcalib/calibration.hpp>
#include <dietcalib/errors.hpp>
#include <dietcalib/measurement_model.hpp>
#include <dietcalib/rng.hpp>
#include <dietcalib/sim_harness.hpp>
#include <dietcalib/stats.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

using namespace dietcalib;

namespace {

CalibrationScenario scenario_with(double alpha, double lambda_wx, double rho) {
    CalibrationScenario s = default_calibration_grid().base;
    s.alpha = alpha;
    s.lambda_wx = lambda_wx;
    s.rho_mw = rho;
    return s;
}

// Admissible random scenario for property checks.
CalibrationScenario random_scenario(RngStream& rng, bool classical) {
    CalibrationScenario s = default_calibration_grid().base;
    s.mu_x = 4.0 + rng.next_normal();
    s.sigma_x = 0.5 + 3.0 * rng.next_uniform();
    s.mu_w = 4.0 + rng.next_normal();
    s.sigma_w = 0.5 + 3.0 * rng.next_uniform();
    s.lambda_wx = 0.05 + 2.0 * rng.next_uniform();
    s.alpha = 0.1 + 3.0 * rng.next_uniform();
    if (classical) {
        s.mu_m = 0.0;
        s.lambda_mx = 1.0;
        s.rho_mw = 0.0;
    } else {
        s.mu_m = rng.next_normal();
        s.lambda_mx = 0.2 + 2.0 * rng.next_uniform();
        s.rho_mw = -0.9 + 1.8 * rng.next_uniform();
    }
    return s;
}

}  // namespace

TEST_CASE("calibration coefficients reproduce frozen reference values") {
    // lambda_wx = 0.8, alpha = 0.5, uncorrelated errors, default moments.
    const CalibrationScenario s = scenario_with(0.5, 0.8, 0.0);
    const TrueCoefficients tc = true_coefficients(s);
    CHECK(tc.tilde_beta1 == doctest::Approx(0.35805656501437044).epsilon(1e-12));
    CHECK(tc.tilde_beta0 == doctest::Approx(2.8573235655196436).epsilon(1e-12));
    CHECK(tc.tilde_psi == doctest::Approx(4.969640229880841).epsilon(1e-12));
    // Rounded presentation values.
    CHECK(std::abs(tc.tilde_beta1 - 0.3581) < 5e-5);
    CHECK(std::abs(shrinkage_variance(s) - 1.995) < 5e-4);
    CHECK(shrinkage_variance(s) ==
          doctest::Approx(1.994983359115177).epsilon(1e-12));
}

TEST_CASE("apparent coefficients collapse to the ideal line under classical assumptions") {
    RngStream rng(13u, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const CalibrationScenario s = random_scenario(rng, true);
        const TrueCoefficients tc = true_coefficients(s);
        CAPTURE(trial);
        CHECK(std::abs(tc.apparent_beta1 - tc.tilde_beta1) <=
              1e-12 * std::abs(tc.tilde_beta1));
        CHECK(std::abs(tc.apparent_beta0 - tc.tilde_beta0) <=
              1e-12 * std::max(1.0, std::abs(tc.tilde_beta0)));
    }
}

TEST_CASE("apparent coefficients reproduce the moments of M") {
    // For any admissible scenario the apparent line must run through the
    // marginal means: E(M) = apparent_beta0 + apparent_beta1 E(W).
    RngStream rng(17u, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const CalibrationScenario s = random_scenario(rng, false);
        const TrueCoefficients tc = true_coefficients(s);
        const Eigen::Vector2d mean = marginal_mean_calibration(s);
        const Eigen::Matrix2d omega = marginal_covariance_calibration(s);
        CAPTURE(trial);
        // Slope is the population least squares slope Cov(M,W)/Var(W).
        CHECK(std::abs(tc.apparent_beta1 - omega(0, 1) / omega(1, 1)) <=
              1e-12 * std::abs(tc.apparent_beta1));
        CHECK(std::abs(mean(0) - (tc.apparent_beta0 + tc.apparent_beta1 * mean(1))) <=
              1e-12 * std::max(1.0, std::abs(mean(0))));
    }
}

TEST_CASE("the shrinkage variance identity holds across random scenarios") {
    RngStream rng(14u, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const CalibrationScenario s = random_scenario(rng, false);
        const TrueCoefficients tc = true_coefficients(s);
        // Var of the calibrated prediction: tilde_beta1^2 Var(W).
        const double var_w = s.lambda_wx * s.lambda_wx * s.sigma_x * s.sigma_x +
                             s.sigma_w * s.sigma_w;
        const double lhs = tc.tilde_beta1 * tc.tilde_beta1 * var_w;
        const double rhs = shrinkage_variance(s);
        CAPTURE(trial);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        // The ideal line also satisfies Var(X) = shrinkage + tilde_psi.
        CHECK(std::abs(s.sigma_x * s.sigma_x - (rhs + tc.tilde_psi)) <=
              1e-12 * (s.sigma_x * s.sigma_x));
        CHECK(rhs < s.sigma_x * s.sigma_x);
    }
}

TEST_CASE("the conditional variance of M given W exceeds tilde_psi by the error share") {
    RngStream rng(15u, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const CalibrationScenario s = random_scenario(rng, true);
        const TrueCoefficients tc = true_coefficients(s);
        // Under the classical assumptions the gap is exactly sigma_m^2.
        const double gap = tc.cond_var_mw - tc.tilde_psi;
        CAPTURE(trial);
        CHECK(gap > 0.0);
        CHECK(std::abs(gap - s.sigma_m() * s.sigma_m()) <=
              1e-11 * (s.sigma_m() * s.sigma_m()));
    }
}

TEST_CASE("coefficient ratio matches its closed form and frozen spots") {
    CHECK(coefficient_ratio(scenario_with(0.5, 0.8, 0.1)) ==
          doctest::Approx(1.0789155959398247).epsilon(1e-12));
    CHECK(coefficient_ratio(scenario_with(2.0, 0.1, 0.8)) ==
          doctest::Approx(21.202392560595097).epsilon(1e-12));
    CHECK(coefficient_ratio(scenario_with(1.3, 0.9, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // ratio == apparent_beta1 / tilde_beta1, and the lambda_mx = 1 closed
    // form 1 + alpha rho (sigma_w / sigma_x) / lambda_wx.
    RngStream rng(16u, 0);
    for (int trial = 0; trial < 100; ++trial) {
        CalibrationScenario s = random_scenario(rng, false);
        s.lambda_mx = 1.0;
        const TrueCoefficients tc = true_coefficients(s);
        const double closed =
            1.0 + s.alpha * s.rho_mw * (s.sigma_w / s.sigma_x) / s.lambda_wx;
        CAPTURE(trial);
        CHECK(std::abs(coefficient_ratio(s) - tc.apparent_beta1 / tc.tilde_beta1) <=
              1e-12 * std::abs(coefficient_ratio(s)));
        CHECK(std::abs(coefficient_ratio(s) - closed) <=
              1e-11 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("fit_calibration recovers an exact affine relationship") {
    StudyDataset sub;
    sub.role = StudyRole::sub_study;
    sub.w = Eigen::VectorXd::LinSpaced(20, -2.0, 3.7);
    sub.m = (1.25 + 0.4 * sub.w.array()).matrix();
    sub.x = Eigen::VectorXd::Zero(20);
    const CalibrationFit fit = fit_calibration(sub);
    CHECK(fit.beta0 == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(fit.beta1 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::abs(fit.residual_variance) < 1e-12);
    CHECK(fit.n == 20);

    StudyDataset large = sub;
    large.role = StudyRole::large_study;
    CHECK_THROWS_AS(fit_calibration(large), std::invalid_argument);
    StudyDataset no_m = sub;
    no_m.m.resize(0);
    CHECK_THROWS_AS(fit_calibration(no_m), std::invalid_argument);
}

TEST_CASE("fitted coefficients concentrate on the ideal line at large n") {
    CalibrationScenario s = scenario_with(0.5, 0.8, 0.0);
    s.n_sub = 1000000;
    s.n_large = 1;
    RngStream rng(20180001u, compose_stream_id(0, 3));
    const CalibrationStudies studies = simulate_calibration(s, rng);
    const CalibrationFit fit = fit_calibration(studies.sub);
    const TrueCoefficients tc = true_coefficients(s);
    CHECK(std::abs(fit.beta1 - tc.tilde_beta1) < 0.01);
    CHECK(std::abs(fit.beta0 - tc.tilde_beta0) < 0.08);
    CHECK(fit.residual_variance ==
          doctest::Approx(tc.cond_var_mw).epsilon(0.02));
}

TEST_CASE("predicted intakes center on the population intake mean") {
    CalibrationScenario s = scenario_with(0.5, 0.8, 0.0);
    // The prediction variance is beta1_hat^2 * Var(W); a small sub-study
    // would leave ~2 * se(beta1_hat)/beta1 of slack, so keep the fit tight.
    s.n_sub = 100000;
    s.n_large = 100000;
    RngStream rng(20180001u, compose_stream_id(1, 4));
    const CalibrationStudies studies = simulate_calibration(s, rng);
    const CalibrationFit fit = fit_calibration(studies.sub);
    const Eigen::VectorXd predicted = predict_intake(fit, studies.large);
    REQUIRE(predicted.size() == studies.large.w.size());
    const Summary ps = summarize(predicted);
    CHECK(ps.mean == doctest::Approx(s.mu_x).epsilon(0.01));
    // Calibrated predictions are shrunk: their variance approaches the
    // shrinkage variance, well below Var(X).
    const double pvar = ps.sd * ps.sd;
    CHECK(pvar == doctest::Approx(shrinkage_variance(s)).epsilon(0.08));
    CHECK(pvar < s.sigma_x * s.sigma_x);

    CHECK_THROWS_AS(predict_intake(fit, studies.sub), std::invalid_argument);
}

TEST_CASE("mean_absolute_error averages absolute prediction gaps") {
    Eigen::VectorXd truth(3), pred(3);
    truth << 1, 2, 3;
    pred << 2, 2, 2;
    CHECK(mean_absolute_error(truth, pred) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(mean_absolute_error(pred, pred) == 0.0);
    CHECK_THROWS_AS(mean_absolute_error(truth.head(2), pred), LengthMismatch);
    CHECK_THROWS_AS(mean_absolute_error(Eigen::VectorXd(), Eigen::VectorXd()),
                    std::invalid_argument);
}

TEST_CASE("the calibrated MAE approaches the folded-normal value") {
    // With normal prediction errors the mean absolute deviation is
    // sqrt(2 Psi / pi) once the fitted line has converged.
    CalibrationScenario s = scenario_with(0.5, 0.8, 0.0);
    s.n_sub = 1000000;
    s.n_large = 1000000;
    RngStream rng(20180001u, compose_stream_id(2, 0));
    const CalibrationStudies studies = simulate_calibration(s, rng);
    const CalibrationFit fit = fit_calibration(studies.sub);
    const Eigen::VectorXd predicted = predict_intake(fit, studies.large);
    const double mae = mean_absolute_error(studies.large.x, predicted);
    const double want = std::sqrt(2.0 * true_coefficients(s).tilde_psi / M_PI);
    CHECK(want == doctest::Approx(1.7786993090164271).epsilon(1e-12));
    CHECK(mae == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("band-conditional densities coincide under the classical assumptions") {
    CalibrationScenario s = scenario_with(1.0, 0.8, 0.0);
    s.n_sub = 400000;
    s.n_large = 1;
    RngStream rng(20180001u, compose_stream_id(4, 0));
    const DensityCurves curves = conditional_density_curves(s, rng, 400000);
    REQUIRE(curves.grid.size() == curves.density_x.size());
    REQUIRE(curves.grid.size() == curves.density_m.size());
    CHECK(curves.n_band >= 100);
    CHECK(curves.band_lo < curves.band_hi);
    CHECK(std::abs(curves.mean_m - curves.mean_x) < 0.05);
    // M given W in a band is noisier than X given W in the same band.
    CHECK(curves.var_m > curves.var_x);
    CHECK(curves.var_m - curves.var_x ==
          doctest::Approx(s.sigma_m() * s.sigma_m()).epsilon(0.15));
}

TEST_CASE("correlated errors shift the density of M within an off-center band") {
    // At rho_mw = 0.1, alpha = 1, the regression of M on W is steeper than
    // the ideal line, so conditioning on W two sd above its mean separates
    // the band means by about 0.446.
    CalibrationScenario s = scenario_with(1.0, 0.8, 0.1);
    s.n_sub = 400000;
    s.n_large = 1;
    const double mean_w = s.mu_w + s.lambda_wx * s.mu_x;
    const double var_w =
        s.lambda_wx * s.lambda_wx * s.sigma_x * s.sigma_x + s.sigma_w * s.sigma_w;
    const double center = mean_w + 2.0 * std::sqrt(var_w);
    RngStream rng(20180001u, compose_stream_id(4, 1));
    const DensityCurves curves = conditional_density_curves(
        s, rng, 400000,
        {center - 0.25 * s.sigma_w, center + 0.25 * s.sigma_w});
    const double gap = curves.mean_m - curves.mean_x;
    CHECK(gap > 0.25);
    CHECK(gap < 0.65);
    // The separation is detectable: at least four standard errors wide.
    const double k = static_cast<double>(curves.n_band);
    const double se = std::sqrt(curves.var_m / k + curves.var_x / k);
    CHECK(gap > 4.0 * se);
}

TEST_CASE("density bands fail loudly when they contain too few observations") {
    CalibrationScenario s = scenario_with(1.0, 0.8, 0.0);
    s.n_sub = 5000;
    s.n_large = 1;
    RngStream rng(3u, 0);
    // A band far outside the support of W.
    CHECK_THROWS_AS(conditional_density_curves(s, rng, 5000, {1000.0, 1001.0}),
                    EmptyConditioningBand);
    RngStream rng2(3u, 0);
    CHECK_THROWS_AS(conditional_density_curves(s, rng2, 5000, {1.0, 1.0}),
                    std::invalid_argument);
    RngStream rng3(3u, 0);
    CHECK_THROWS_AS(conditional_density_curves(s, rng3, 0), std::invalid_argument);
}

TEST_CASE("default band is a narrow window around the median of W") {
    Eigen::VectorXd w(7);
    w << 1, 2, 3, 4, 5, 6, 7;
    const CalibrationScenario s = scenario_with(1.0, 0.8, 0.0);
    const std::pair<double, double> band = default_w_band(s, w);
    CHECK(band.first == doctest::Approx(4.0 - 0.1 * s.sigma_w).epsilon(1e-12));
    CHECK(band.second == doctest::Approx(4.0 + 0.1 * s.sigma_w).epsilon(1e-12));
}
