#include "dietcalib/measurement_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dietcalib/errors.hpp"
#include "dietcalib/stats.hpp"

namespace dietcalib {
namespace {

void require_finite_scalar(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

void require_correlation(double rho, const char* name) {
    require_finite_scalar(rho, name);
    if (!(rho > -1.0 && rho < 1.0)) {
        throw std::invalid_argument(std::string(name) +
                                    " must lie strictly inside (-1, 1)");
    }
}

// Draws a block of `count` iid standard normals.
Eigen::VectorXd draw_normals(RngStream& rng, Eigen::Index count) {
    Eigen::VectorXd z(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        z(i) = rng.next_normal();
    }
    return z;
}

// Draws `count` rows of correlated errors with the given sds and
// correlation matrix, row major. Scaling sits outside the factorization,
// so arbitrarily small error sds stay exactly representable while the
// correlation matrix alone decides positive definiteness.
Eigen::MatrixXd draw_errors(RngStream& rng, Eigen::Index count,
                            const Eigen::VectorXd& sd,
                            const Eigen::MatrixXd& corr) {
    const Eigen::MatrixXd L = cholesky(corr);
    const Eigen::MatrixXd shaper = (sd.asDiagonal() * L).transpose();
    const Eigen::Index d = sd.size();
    Eigen::MatrixXd z(count, d);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            z(i, j) = rng.next_normal();
        }
    }
    return z * shaper;
}

}  // namespace

void CalibrationScenario::validate() const {
    require_finite_scalar(mu_x, "mu_x");
    require_finite_scalar(mu_m, "mu_m");
    require_finite_scalar(mu_w, "mu_w");
    require_finite_scalar(lambda_mx, "lambda_mx");
    require_finite_scalar(sigma_x, "sigma_x");
    require_finite_scalar(sigma_w, "sigma_w");
    require_finite_scalar(alpha, "alpha");
    require_finite_scalar(lambda_wx, "lambda_wx");
    if (!(sigma_x > 0.0)) {
        throw std::invalid_argument("sigma_x must be positive");
    }
    if (!(sigma_w > 0.0)) {
        throw std::invalid_argument("sigma_w must be positive");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("alpha must be positive");
    }
    if (lambda_wx == 0.0) {
        throw ZeroLoading("lambda_wx must be non-zero");
    }
    require_correlation(rho_mw, "rho_mw");
    if (n_sub < 1 || n_large < 1) {
        throw std::invalid_argument("study sizes must be at least 1");
    }
}

void TriadScenario::validate() const {
    require_finite_scalar(mu_x, "mu_x");
    require_finite_scalar(sigma_x, "sigma_x");
    if (!(sigma_x > 0.0)) {
        throw std::invalid_argument("sigma_x must be positive");
    }
    for (int j = 0; j < 3; ++j) {
        require_finite_scalar(mu(j), "mu");
        require_finite_scalar(lambda(j), "lambda");
        require_finite_scalar(sigma(j), "sigma");
        if (lambda(j) == 0.0) {
            throw ZeroLoading("triad loadings must be non-zero");
        }
        if (!(sigma(j) > 0.0)) {
            throw std::invalid_argument("error sds must be positive");
        }
    }
    require_correlation(rho_mr, "rho_mr");
    require_correlation(rho_mw, "rho_mw");
    require_correlation(rho_rw, "rho_rw");
    if (n < 1) {
        throw std::invalid_argument("study size must be at least 1");
    }

    Eigen::Matrix3d corr;
    corr << 1.0, rho_mr, rho_mw,
            rho_mr, 1.0, rho_rw,
            rho_mw, rho_rw, 1.0;
    cholesky(corr);  // NotPositiveDefinite on an inconsistent triple
}

CalibrationStudies simulate_calibration(const CalibrationScenario& s,
                                        RngStream& rng) {
    s.validate();

    Eigen::Vector2d sd(s.sigma_m(), s.sigma_w);
    Eigen::Matrix2d corr;
    corr << 1.0, s.rho_mw,
            s.rho_mw, 1.0;

    CalibrationStudies out;

    out.sub.role = StudyRole::sub_study;
    out.sub.x = (s.mu_x + (s.sigma_x * draw_normals(rng, s.n_sub)).array()).matrix();
    {
        const Eigen::MatrixXd e = draw_errors(rng, s.n_sub, sd, corr);
        out.sub.m = (s.mu_m + (s.lambda_mx * out.sub.x).array() + e.col(0).array()).matrix();
        out.sub.w = (s.mu_w + (s.lambda_wx * out.sub.x).array() + e.col(1).array()).matrix();
    }

    // The large study observes only w, so its rows need just the intake
    // draw and the single w error component.
    out.large.role = StudyRole::large_study;
    out.large.x =
        (s.mu_x + (s.sigma_x * draw_normals(rng, s.n_large)).array()).matrix();
    {
        const Eigen::VectorXd e_w = s.sigma_w * draw_normals(rng, s.n_large);
        out.large.w =
            (s.mu_w + (s.lambda_wx * out.large.x).array() + e_w.array()).matrix();
    }
    return out;
}

StudyDataset simulate_triads(const TriadScenario& s, RngStream& rng) {
    s.validate();

    Eigen::Matrix3d corr;
    corr << 1.0, s.rho_mr, s.rho_mw,
            s.rho_mr, 1.0, s.rho_rw,
            s.rho_mw, s.rho_rw, 1.0;

    StudyDataset data;
    data.role = StudyRole::sub_study;
    data.x = (s.mu_x + (s.sigma_x * draw_normals(rng, s.n)).array()).matrix();
    const Eigen::MatrixXd e = draw_errors(rng, s.n, s.sigma, corr);
    data.m = (s.mu(0) + (s.lambda(0) * data.x).array() + e.col(0).array()).matrix();
    data.r = (s.mu(1) + (s.lambda(1) * data.x).array() + e.col(1).array()).matrix();
    data.w = (s.mu(2) + (s.lambda(2) * data.x).array() + e.col(2).array()).matrix();
    return data;
}

Eigen::Matrix2d marginal_covariance_calibration(const CalibrationScenario& s) {
    const double vx = s.sigma_x * s.sigma_x;
    const double sm = s.sigma_m();
    Eigen::Matrix2d omega;
    omega(0, 0) = s.lambda_mx * s.lambda_mx * vx + sm * sm;
    omega(0, 1) = sm * s.rho_mw * s.sigma_w + s.lambda_mx * s.lambda_wx * vx;
    omega(1, 0) = omega(0, 1);
    omega(1, 1) = s.lambda_wx * s.lambda_wx * vx + s.sigma_w * s.sigma_w;
    return omega;
}

Eigen::Vector2d marginal_mean_calibration(const CalibrationScenario& s) {
    return {s.mu_m + s.lambda_mx * s.mu_x, s.mu_w + s.lambda_wx * s.mu_x};
}

Eigen::Matrix3d marginal_covariance_triads(const TriadScenario& s) {
    const double vx = s.sigma_x * s.sigma_x;
    Eigen::Matrix3d rho;
    rho << 1.0, s.rho_mr, s.rho_mw,
           s.rho_mr, 1.0, s.rho_rw,
           s.rho_mw, s.rho_rw, 1.0;
    Eigen::Matrix3d omega;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            omega(j, k) = s.sigma(j) * rho(j, k) * s.sigma(k) +
                          s.lambda(j) * s.lambda(k) * vx;
        }
    }
    return omega;
}

Eigen::Vector3d marginal_mean_triads(const TriadScenario& s) {
    return s.mu + s.lambda * s.mu_x;
}

}  // namespace dietcalib
