#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dietcalib/errors.hpp>
#include <dietcalib/measurement_model.hpp>
#include <dietcalib/rng.hpp>
#include <dietcalib/sim_harness.hpp>
#include <dietcalib/stats.hpp>
#include <dietcalib/triads.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

using namespace dietcalib;

namespace {

TriadScenario default_pair(double lambda_rx, double lambda_wx, double rho_rw) {
    TriadGrid grid = default_triad_grid();
    TriadScenario s = grid.base;
    s.lambda(1) = lambda_rx;
    s.lambda(2) = lambda_wx;
    s.rho_rw = rho_rw;
    return s;
}

}  // namespace

TEST_CASE("true_vc reproduces the frozen reference values") {
    CHECK(true_vc(default_pair(0.95, 0.9, 0.0)) ==
          doctest::Approx(0.5804297176985014).epsilon(1e-12));
    CHECK(true_vc(default_pair(0.8, 0.5, 0.0)) ==
          doctest::Approx(0.3681765492039875).epsilon(1e-12));
    // Rounded presentation values.
    CHECK(std::abs(true_vc(default_pair(0.95, 0.9, 0.0)) - 0.580) < 5e-4);
    CHECK(std::abs(true_vc(default_pair(0.8, 0.5, 0.0)) - 0.368) < 5e-4);
}

TEST_CASE("the population triad product equals the true VC when errors are independent") {
    RngStream rng(21u, 0);
    for (int trial = 0; trial < 100; ++trial) {
        TriadScenario s = default_triad_grid().base;
        s.sigma_x = 0.5 + 3.0 * rng.next_uniform();
        s.lambda(0) = 0.2 + 1.5 * rng.next_uniform();
        s.lambda(1) = 0.2 + 1.5 * rng.next_uniform();
        s.lambda(2) = 0.2 + 1.5 * rng.next_uniform();
        s.sigma(0) = 0.3 + 2.0 * rng.next_uniform();
        s.sigma(1) = 0.3 + 2.0 * rng.next_uniform();
        s.sigma(2) = 0.3 + 2.0 * rng.next_uniform();
        s.rho_mr = 0.0;
        s.rho_mw = 0.0;
        s.rho_rw = 0.0;
        CAPTURE(trial);
        CHECK(std::abs(population_vc_triad_product(s) - true_vc(s)) <=
              1e-12 * true_vc(s));
    }
}

TEST_CASE("correlated reference and self-report errors inflate the triad product") {
    // Frozen values for the default design.
    CHECK(population_vc_triad_product(default_pair(0.95, 0.9, 0.1)) ==
          doctest::Approx(0.6279293594280667).epsilon(1e-12));
    CHECK(population_vc_triad_product(default_pair(0.95, 0.9, 0.3)) ==
          doctest::Approx(0.713504398669064).epsilon(1e-12));
    CHECK(population_vc_triad_product(default_pair(0.95, 0.9, 0.5)) ==
          doctest::Approx(0.7898618698281763).epsilon(1e-12));
    CHECK(population_vc_triad_product(default_pair(0.8, 0.5, 0.1)) ==
          doctest::Approx(0.430020247321179).epsilon(1e-12));
    CHECK(population_vc_triad_product(default_pair(0.8, 0.5, 0.3)) ==
          doctest::Approx(0.5325826664011808).epsilon(1e-12));
    CHECK(population_vc_triad_product(default_pair(0.8, 0.5, 0.5)) ==
          doctest::Approx(0.618361690271814).epsilon(1e-12));
    // Monotone in rho_rw, and always above the truth it distorts.
    for (auto pair : {std::pair<double, double>{0.95, 0.9}, {0.8, 0.5}}) {
        double prev = true_vc(default_pair(pair.first, pair.second, 0.0));
        for (double rho : {0.1, 0.3, 0.5}) {
            const double v =
                population_vc_triad_product(default_pair(pair.first, pair.second, rho));
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("estimate_vc is exact on a noiseless triad") {
    // All three instruments equal to x itself: every correlation is one.
    StudyDataset data;
    data.role = StudyRole::sub_study;
    data.x = Eigen::VectorXd::LinSpaced(50, 1.0, 9.0);
    data.m = data.x;
    data.r = data.x;
    data.w = data.x;
    const TriadEstimate est = estimate_vc(data);
    CHECK(est.status == TriadStatus::ok);
    CHECK(est.rho_mw_hat == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(est.rho_wr_hat == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(est.rho_mr_hat == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(est.vc_hat == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("estimate_vc converges to the true VC on simulated data") {
    TriadScenario s = default_pair(0.95, 0.9, 0.0);
    s.n = 100000;
    RngStream rng(20180001u, compose_stream_id(0, 0));
    const StudyDataset data = simulate_triads(s, rng);
    const TriadEstimate est = estimate_vc(data);
    CHECK(est.status == TriadStatus::ok);
    CHECK(std::abs(est.vc_hat - true_vc(s)) < 0.01);

    // The three pairwise correlations also match their population values.
    const Eigen::Matrix3d omega = marginal_covariance_triads(s);
    CHECK(est.rho_mw_hat ==
          doctest::Approx(omega(0, 2) / std::sqrt(omega(0, 0) * omega(2, 2)))
              .epsilon(0.02));
    CHECK(est.rho_wr_hat ==
          doctest::Approx(omega(2, 1) / std::sqrt(omega(2, 2) * omega(1, 1)))
              .epsilon(0.02));
    CHECK(est.rho_mr_hat ==
          doctest::Approx(omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1)))
              .epsilon(0.02));
}

TEST_CASE("a negative pairwise correlation yields an undefined estimate") {
    // The reference runs against the others: rho_mr and rho_wr are negative.
    StudyDataset data;
    data.role = StudyRole::sub_study;
    data.x = Eigen::VectorXd::LinSpaced(60, -2.0, 2.0);
    data.m = data.x;
    data.w = data.x;
    data.r = -data.x;
    const TriadEstimate est = estimate_vc(data);
    CHECK(est.status == TriadStatus::negative_correlation);
    CHECK(std::isnan(est.vc_hat));
    CHECK(est.rho_mr_hat < 0.0);
}

TEST_CASE("a Heywood case carries the raw root for diagnostics") {
    // Correlations rho_mw = 0.9, rho_wr = 0.8, rho_mr = 0.5 push the
    // product over one: sqrt(0.9 * 0.8 / 0.5) = 1.2.  Build them from a
    // latent factor plus targeted noise, then verify the status flag.
    RngStream rng(20180001u, 999);
    const Eigen::Index n = 4000;
    Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) base(i) = rng.next_normal();

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d corr;
    corr << 1.0, 0.5, 0.9,  // (m, r, w) with rho_mw = 0.9
        0.5, 1.0, 0.8,       // rho_mr = 0.5, rho_rw = 0.8
        0.9, 0.8, 1.0;
    const Eigen::MatrixXd rows = mvn_sample(rng, mean, corr, n);
    StudyDataset data;
    data.role = StudyRole::sub_study;
    data.x = base;
    data.m = rows.col(0);
    data.r = rows.col(1);
    data.w = rows.col(2);

    const TriadEstimate est = estimate_vc(data);
    CHECK(est.status == TriadStatus::heywood);
    CHECK(est.vc_hat > 1.0);
    CHECK(est.vc_hat == doctest::Approx(1.2).epsilon(0.05));
}

TEST_CASE("estimate_vc requires all three instruments") {
    StudyDataset data;
    data.role = StudyRole::sub_study;
    data.x = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    data.m = data.x;
    data.w = data.x;
    CHECK_THROWS_AS(estimate_vc(data), std::invalid_argument);
}

TEST_CASE("population triad product rejects non-positive population correlations") {
    // A strongly negative M-R error correlation drives the population
    // correlation of M and R to zero or below.
    TriadScenario s = default_triad_grid().base;
    s.lambda(0) = 0.05;
    s.lambda(1) = 0.05;
    s.lambda(2) = 0.9;
    s.sigma(0) = 3.0;
    s.sigma(1) = 3.0;
    s.rho_mr = -0.5;
    CHECK_THROWS_AS(population_vc_triad_product(s), NotPositiveDefinite);
}
