#pragma once

#include <Eigen/Dense>

#include "dietcalib/measurement_model.hpp"
#include "dietcalib/rng.hpp"

namespace dietcalib {

// Least-squares calibration fit of the biomarker on the self-report,
// M ~ 1 + W, estimated from a sub-study.
struct CalibrationFit {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double residual_variance = 0.0;
    double beta1_se = 0.0;
    Eigen::Index n = 0;
};

// Fits the calibration line on a sub-study dataset. Requires
// sub.role == sub_study with m and w present (std::invalid_argument
// otherwise); propagates DegenerateRegressor when w is constant.
CalibrationFit fit_calibration(const StudyDataset& sub);

// Closed-form coefficients implied by a scenario.
//
// `tilde_*` describe the regression of the true intake X on W — the line
// the calibration procedure is trying to recover:
//     tilde_beta1 = lambda_wx sigma_x^2 / (sigma_w^2 + lambda_wx^2 sigma_x^2)
//     tilde_beta0 = (sigma_w^2 mu_x - sigma_x^2 lambda_wx mu_w)
//                   / (sigma_w^2 + lambda_wx^2 sigma_x^2)
//     tilde_psi   = sigma_w^2 sigma_x^2 / (sigma_w^2 + lambda_wx^2 sigma_x^2)
//
// `apparent_*` describe the regression of M on W — the line least squares
// actually converges to. The two coincide exactly when the classical
// biomarker assumptions hold; correlated errors tilt the apparent slope by
// sigma_m rho_mw sigma_w in the numerator.
struct TrueCoefficients {
    double tilde_beta0 = 0.0;
    double tilde_beta1 = 0.0;
    double tilde_psi = 0.0;       // Var(X | W)
    double apparent_beta0 = 0.0;
    double apparent_beta1 = 0.0;
    double cond_var_mw = 0.0;     // Var(M | W)
};

TrueCoefficients true_coefficients(const CalibrationScenario& s);

// Predicted intakes beta0 + beta1 * w for every row of a large study.
// Requires large.role == large_study (std::invalid_argument otherwise).
Eigen::VectorXd predict_intake(const CalibrationFit& fit,
                               const StudyDataset& large);

// Variance of the calibration predictions E(X | W) in the population:
//     Var(tilde_beta0 + tilde_beta1 W) = sigma_x^2
//         / (1 + sigma_w^2 / (lambda_wx^2 sigma_x^2)).
// Always strictly less than sigma_x^2: regression to the mean shrinks the
// predicted intakes relative to the true ones.
double shrinkage_variance(const CalibrationScenario& s);

// Population ratio of the apparent slope to the target slope,
// apparent_beta1 / tilde_beta1. Equals 1 + alpha rho_mw (sigma_w /
// sigma_x) / lambda_wx when lambda_mx = 1.
double coefficient_ratio(const CalibrationScenario& s);

// Mean absolute prediction error against the retained truth, on the scale
// of the data (log intake): mean |x_i - pred_i|. Throws LengthMismatch on
// unequal lengths, std::invalid_argument on empty or non-finite input.
double mean_absolute_error(const Eigen::Ref<const Eigen::VectorXd>& truth,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted);

// Kernel density curves of the true and measured intake inside a
// conditioning band on W — the graphical check of what calibration can and
// cannot see. Sampled at `n` rows from the scenario; rows with w inside
// [w_band.first, w_band.second] feed two KDE curves (X and M) on a shared
// grid, plus the band-conditional means.
struct DensityCurves {
    Eigen::VectorXd grid;
    Eigen::VectorXd density_x;
    Eigen::VectorXd density_m;
    double mean_x = 0.0;
    double mean_m = 0.0;
    double var_x = 0.0;  // band-conditional variances (n-1 denominator)
    double var_m = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    Eigen::Index n_band = 0;  // rows inside the band
};

// Throws EmptyConditioningBand when fewer than 100 rows land in the band,
// std::invalid_argument for an empty/invalid band or n <= 0.
DensityCurves conditional_density_curves(const CalibrationScenario& s,
                                         RngStream& rng, Eigen::Index n,
                                         std::pair<double, double> w_band);

// Same, with the band computed from the drawn sample itself: width
// 0.2 * sigma_w centered on the sample median of w.
DensityCurves conditional_density_curves(const CalibrationScenario& s,
                                         RngStream& rng, Eigen::Index n);

// The default conditioning band: width 0.2 * sigma_w centered on the
// sample median of w.
std::pair<double, double> default_w_band(const CalibrationScenario& s,
                                         const Eigen::Ref<const Eigen::VectorXd>& w);

}  // namespace dietcalib
