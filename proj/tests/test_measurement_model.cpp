#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dietcalib/errors.hpp>
#include <dietcalib/measurement_model.hpp>
#include <dietcalib/rng.hpp>
#include <dietcalib/sim_harness.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

using namespace dietcalib;

namespace {

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& columns) {
    const Eigen::RowVectorXd mean = columns.colwise().mean();
    const Eigen::MatrixXd centered = columns.rowwise() - mean;
    return centered.transpose() * centered /
           static_cast<double>(columns.rows() - 1);
}

Eigen::MatrixXd bind_cols(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::MatrixXd m(a.size(), 2);
    m.col(0) = a;
    m.col(1) = b;
    return m;
}

Eigen::MatrixXd bind_cols(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c) {
    Eigen::MatrixXd m(a.size(), 3);
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    return m;
}

}  // namespace

TEST_CASE("scenario validation rejects out-of-range parameters") {
    CalibrationScenario s = default_calibration_grid().base;
    CHECK_NOTHROW(s.validate());

    CalibrationScenario bad = s;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.sigma_x = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.rho_mw = 1.0;  // perfectly correlated errors are degenerate
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.rho_mw = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = s;
    bad.lambda_wx = 0.0;
    CHECK_THROWS_AS(bad.validate(), ZeroLoading);

    bad = s;
    bad.n_sub = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("triad validation rejects inconsistent correlation structures") {
    TriadScenario t = default_triad_grid().base;
    CHECK_NOTHROW(t.validate());

    TriadScenario bad = t;
    bad.lambda(1) = 0.0;
    CHECK_THROWS_AS(bad.validate(), ZeroLoading);

    bad = t;
    bad.rho_rw = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // Each pairwise correlation is admissible but the joint matrix is not
    // positive definite.
    bad = t;
    bad.rho_mr = 0.9;
    bad.rho_mw = 0.9;
    bad.rho_rw = -0.9;
    CHECK_THROWS_AS(bad.validate(), NotPositiveDefinite);
}

TEST_CASE("sigma_m scales with alpha") {
    CalibrationScenario s = default_calibration_grid().base;
    s.alpha = 0.5;
    CHECK(s.sigma_m() == doctest::Approx(0.5 * s.sigma_x).epsilon(1e-15));
    CHECK(sigma_m_from_alpha(2.0, s.sigma_x) ==
          doctest::Approx(2.0 * s.sigma_x).epsilon(1e-15));
}

TEST_CASE("simulated studies have the documented shape") {
    CalibrationScenario s = default_calibration_grid().base;
    s.alpha = 0.5;
    s.lambda_wx = 0.8;
    s.rho_mw = 0.0;
    s.n_sub = 37;
    s.n_large = 53;
    RngStream rng(1u, compose_stream_id(0, 0));
    const CalibrationStudies studies = simulate_calibration(s, rng);

    CHECK(studies.sub.role == StudyRole::sub_study);
    CHECK(studies.sub.rows() == 37);
    CHECK(studies.sub.has_m());
    CHECK_FALSE(studies.sub.has_r());
    CHECK(studies.sub.w.size() == 37);
    CHECK(studies.sub.x.size() == 37);

    CHECK(studies.large.role == StudyRole::large_study);
    CHECK(studies.large.rows() == 53);
    CHECK_FALSE(studies.large.has_m());
    CHECK(studies.large.w.size() == 53);
    CHECK(studies.large.x.size() == 53);

    TriadScenario t = default_triad_grid().base;
    t.n = 29;
    RngStream rng2(1u, compose_stream_id(0, 1));
    const StudyDataset triad = simulate_triads(t, rng2);
    CHECK(triad.rows() == 29);
    CHECK(triad.has_m());
    CHECK(triad.has_r());
    CHECK(triad.w.size() == 29);
}

TEST_CASE("simulation is reproducible from (seed, stream id)") {
    CalibrationScenario s = default_calibration_grid().base;
    s.n_sub = 100;
    s.n_large = 100;
    RngStream a(20180001u, compose_stream_id(2, 9));
    RngStream b(20180001u, compose_stream_id(2, 9));
    const CalibrationStudies ra = simulate_calibration(s, a);
    const CalibrationStudies rb = simulate_calibration(s, b);
    CHECK((ra.sub.m - rb.sub.m).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ra.sub.w - rb.sub.w).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ra.sub.x - rb.sub.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ra.large.w - rb.large.w).cwiseAbs().maxCoeff() == 0.0);

    RngStream c(20180001u, compose_stream_id(2, 10));
    const CalibrationStudies rc = simulate_calibration(s, c);
    CHECK((rc.sub.m - ra.sub.m).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("the measured intake collapses onto truth as alpha vanishes") {
    CalibrationScenario s = default_calibration_grid().base;
    s.alpha = 1e-8;
    s.lambda_mx = 1.0;
    s.mu_m = 0.0;
    s.rho_mw = 0.0;
    s.n_sub = 1000;
    s.n_large = 1;
    RngStream rng(20180001u, 0);
    const CalibrationStudies studies = simulate_calibration(s, rng);
    const double worst = (studies.sub.m - studies.sub.x).cwiseAbs().maxCoeff();
    CHECK(worst < 1e-6);
    CHECK(worst > 0.0);  // alpha is small, not zero
}

TEST_CASE("sub-study moments match the closed-form joint covariance") {
    // Every default grid cell: sampled (m, w) covariance within 2% of the
    // model covariance (scaled by its largest entry).
    const CalibrationGrid grid = default_calibration_grid();
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        CalibrationScenario s = grid.cell(c);
        s.n_sub = 100000;
        s.n_large = 1;
        RngStream rng(20180001u, compose_stream_id(c, 0));
        const CalibrationStudies studies = simulate_calibration(s, rng);

        const Eigen::Matrix2d omega = marginal_covariance_calibration(s);
        const Eigen::MatrixXd sc =
            sample_cov(bind_cols(studies.sub.m, studies.sub.w));
        const double scale = omega.cwiseAbs().maxCoeff();
        CAPTURE(c);
        CHECK((sc - omega).cwiseAbs().maxCoeff() <= 0.02 * scale);

        const Eigen::Vector2d mu = marginal_mean_calibration(s);
        CHECK(studies.sub.m.mean() == doctest::Approx(mu(0)).epsilon(0.01));
        CHECK(studies.sub.w.mean() == doctest::Approx(mu(1)).epsilon(0.01));
        CHECK(studies.sub.x.mean() == doctest::Approx(s.mu_x).epsilon(0.01));
    }
}

TEST_CASE("triad moments match the closed-form joint covariance") {
    const TriadGrid grid = default_triad_grid();
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        TriadScenario t = grid.cell(c);
        t.n = 100000;
        RngStream rng(20180001u, compose_stream_id(c, 0));
        const StudyDataset data = simulate_triads(t, rng);

        const Eigen::Matrix3d omega = marginal_covariance_triads(t);
        const Eigen::MatrixXd sc = sample_cov(bind_cols(data.m, data.r, data.w));
        const double scale = omega.cwiseAbs().maxCoeff();
        CAPTURE(c);
        CHECK((sc - omega).cwiseAbs().maxCoeff() <= 0.02 * scale);

        const Eigen::Vector3d mu = marginal_mean_triads(t);
        CHECK(data.m.mean() == doctest::Approx(mu(0)).epsilon(0.01));
        CHECK(data.r.mean() == doctest::Approx(mu(1)).epsilon(0.01));
        CHECK(data.w.mean() == doctest::Approx(mu(2)).epsilon(0.01));
    }
}

TEST_CASE("correlated errors show up in the sampled cross-covariance") {
    CalibrationScenario s = default_calibration_grid().base;
    s.alpha = 1.0;
    s.lambda_wx = 0.8;
    s.rho_mw = 0.5;
    s.n_sub = 200000;
    s.n_large = 1;
    RngStream rng(7u, 0);
    const CalibrationStudies studies = simulate_calibration(s, rng);
    // Cov(M, W) = lambda_mx lambda_wx sigma_x^2 + sigma_m rho sigma_w.
    const double want =
        0.8 * s.sigma_x * s.sigma_x + s.sigma_m() * 0.5 * s.sigma_w;
    const Eigen::MatrixXd sc = sample_cov(bind_cols(studies.sub.m, studies.sub.w));
    CHECK(sc(0, 1) == doctest::Approx(want).epsilon(0.02));
}
