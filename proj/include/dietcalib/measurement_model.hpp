#pragma once

#include <Eigen/Dense>

#include "dietcalib/rng.hpp"

namespace dietcalib {

// Bivariate measurement-error model for one calibration cell.
//
// True usual intake X ~ N(mu_x, sigma_x^2) on the log scale. A biomarker
// measurement M and a self-reported measurement W load on X:
//
//     M = mu_m + lambda_mx * X + e_m
//     W = mu_w + lambda_wx * X + e_w
//
// with (e_m, e_w) jointly normal, sd(e_m) = alpha * sigma_x,
// sd(e_w) = sigma_w, and corr(e_m, e_w) = rho_mw. The biomarker obeys the
// classical error assumptions when mu_m = 0, lambda_mx = 1, rho_mw = 0.
struct CalibrationScenario {
    double mu_x = 0.0;
    double sigma_x = 1.0;
    double mu_m = 0.0;
    double lambda_mx = 1.0;
    double alpha = 1.0;  // error sd of M as a multiple of sigma_x
    double mu_w = 0.0;
    double sigma_w = 1.0;
    double lambda_wx = 1.0;
    double rho_mw = 0.0;
    Eigen::Index n_sub = 0;    // sub-study size (X, M, W observed)
    Eigen::Index n_large = 0;  // large-study size (W observed)

    double sigma_m() const { return alpha * sigma_x; }

    // True if the classical-biomarker assumptions hold exactly.
    bool assumptions_hold() const {
        return mu_m == 0.0 && lambda_mx == 1.0 && rho_mw == 0.0;
    }

    // Throws std::invalid_argument / ZeroLoading / NotPositiveDefinite when
    // the configuration is outside the model: non-positive scales or sizes,
    // |rho| >= 1, zero loadings.
    void validate() const;
};

// Trivariate extension for the method of triads: a reference instrument R
// joins M and W, each loading on the same X:
//
//     Q_j = mu_j + lambda_j * X + e_j,   j in {M, R, W}
//
// with error sds sigma = (sigma_m, sigma_r, sigma_w) and error
// correlations rho_mr, rho_mw, rho_rw. sigma_m is stored directly;
// sigma_m_from_alpha() builds it from the error-ratio parameterization.
struct TriadScenario {
    double mu_x = 0.0;
    double sigma_x = 1.0;
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();        // (mu_m, mu_r, mu_w)
    Eigen::Vector3d lambda = Eigen::Vector3d::Ones();    // loadings on X
    Eigen::Vector3d sigma = Eigen::Vector3d::Ones();     // error sds
    double rho_mr = 0.0;
    double rho_mw = 0.0;
    double rho_rw = 0.0;
    Eigen::Index n = 0;

    // Same validity rules as the bivariate scenario, plus positive
    // definiteness of the 3x3 error correlation matrix.
    void validate() const;
};

inline double sigma_m_from_alpha(double alpha, double sigma_x) {
    return alpha * sigma_x;
}

enum class StudyRole { sub_study, large_study };

// One simulated study. Column vectors are empty when the corresponding
// variable is not carried: the large study never carries m or r, and only
// triad datasets carry r. The true intake x is retained for oracle
// evaluation (prediction error against truth); estimation code never reads
// it.
struct StudyDataset {
    StudyRole role = StudyRole::sub_study;
    Eigen::VectorXd x;
    Eigen::VectorXd m;
    Eigen::VectorXd r;
    Eigen::VectorXd w;

    Eigen::Index rows() const { return x.size(); }
    bool has_m() const { return m.size() > 0; }
    bool has_r() const { return r.size() > 0; }
};

struct CalibrationStudies {
    StudyDataset sub;    // n_sub rows of (x, m, w)
    StudyDataset large;  // n_large rows of (x, w)
};

// Draws the paired sub-study and large study for one replicate. All
// randomness comes from `rng`, in a fixed order (sub study first, row
// major), so one (master_seed, stream_id) pair reproduces the replicate
// exactly. Validates the scenario first.
CalibrationStudies simulate_calibration(const CalibrationScenario& s,
                                        RngStream& rng);

// Draws one triad study of n rows of (x, m, r, w). Same determinism
// contract as simulate_calibration.
StudyDataset simulate_triads(const TriadScenario& s, RngStream& rng);

// Closed-form 2x2 covariance of the observed pair (M, W) implied by the
// scenario:
//     Var(M)    = lambda_mx^2 sigma_x^2 + sigma_m^2
//     Cov(M, W) = sigma_m rho_mw sigma_w + lambda_mx lambda_wx sigma_x^2
//     Var(W)    = lambda_wx^2 sigma_x^2 + sigma_w^2
Eigen::Matrix2d marginal_covariance_calibration(const CalibrationScenario& s);

// Closed-form mean of (M, W): (mu_m + lambda_mx mu_x, mu_w + lambda_wx mu_x).
Eigen::Vector2d marginal_mean_calibration(const CalibrationScenario& s);

// Closed-form 3x3 covariance of (M, R, W):
//     diag:     lambda_j^2 sigma_x^2 + sigma_j^2
//     off-diag: sigma_j rho_jk sigma_k + lambda_j lambda_k sigma_x^2
Eigen::Matrix3d marginal_covariance_triads(const TriadScenario& s);

// Closed-form mean of (M, R, W): mu_j + lambda_j mu_x.
Eigen::Vector3d marginal_mean_triads(const TriadScenario& s);

}  // namespace dietcalib
