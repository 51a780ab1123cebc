#include "dietcalib/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dietcalib/errors.hpp"
#include "dietcalib/kde.hpp"
#include "dietcalib/stats.hpp"

namespace dietcalib {

CalibrationFit fit_calibration(const StudyDataset& sub) {
    if (sub.role != StudyRole::sub_study) {
        throw std::invalid_argument(
            "fit_calibration: the calibration line is fit on a sub-study");
    }
    if (!sub.has_m() || sub.w.size() == 0) {
        throw std::invalid_argument(
            "fit_calibration: sub-study must carry both m and w");
    }
    const OlsFit ols = ols_fit(sub.w, sub.m);
    CalibrationFit fit;
    fit.beta0 = ols.intercept;
    fit.beta1 = ols.slope;
    fit.residual_variance = ols.residual_variance;
    fit.beta1_se = ols.slope_se;
    fit.n = sub.w.size();
    return fit;
}

TrueCoefficients true_coefficients(const CalibrationScenario& s) {
    s.validate();
    const double vx = s.sigma_x * s.sigma_x;
    const double vw = s.sigma_w * s.sigma_w;
    const double sm = s.sigma_m();
    const double denom = vw + s.lambda_wx * s.lambda_wx * vx;

    TrueCoefficients c;
    c.tilde_beta1 = s.lambda_wx * vx / denom;
    c.tilde_beta0 = (vw * s.mu_x - vx * s.lambda_wx * s.mu_w) / denom;
    c.tilde_psi = vw * vx / denom;

    c.apparent_beta1 =
        (s.lambda_mx * s.lambda_wx * vx + sm * s.rho_mw * s.sigma_w) / denom;
    c.apparent_beta0 =
        (vw * (s.mu_m + s.lambda_mx * s.mu_x) -
         vx * s.lambda_wx * (s.lambda_mx * s.mu_w - s.lambda_wx * s.mu_m) -
         sm * s.rho_mw * s.sigma_w * (s.mu_w + s.lambda_wx * s.mu_x)) /
        denom;

    const Eigen::Matrix2d omega = marginal_covariance_calibration(s);
    c.cond_var_mw = omega(0, 0) - omega(0, 1) * omega(0, 1) / omega(1, 1);
    return c;
}

Eigen::VectorXd predict_intake(const CalibrationFit& fit,
                               const StudyDataset& large) {
    if (large.role != StudyRole::large_study) {
        throw std::invalid_argument(
            "predict_intake: predictions are made on a large study");
    }
    if (large.w.size() == 0) {
        throw std::invalid_argument("predict_intake: large study carries no w");
    }
    return (fit.beta0 + (fit.beta1 * large.w).array()).matrix();
}

double shrinkage_variance(const CalibrationScenario& s) {
    s.validate();
    const double vx = s.sigma_x * s.sigma_x;
    const double vw = s.sigma_w * s.sigma_w;
    return vx / (1.0 + vw / (s.lambda_wx * s.lambda_wx * vx));
}

double coefficient_ratio(const CalibrationScenario& s) {
    const TrueCoefficients c = true_coefficients(s);
    return c.apparent_beta1 / c.tilde_beta1;
}

double mean_absolute_error(const Eigen::Ref<const Eigen::VectorXd>& truth,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted) {
    if (truth.size() != predicted.size()) {
        throw LengthMismatch("mean_absolute_error: length mismatch");
    }
    if (truth.size() == 0) {
        throw std::invalid_argument("mean_absolute_error: empty input");
    }
    if (!truth.allFinite() || !predicted.allFinite()) {
        throw std::invalid_argument("mean_absolute_error: non-finite values");
    }
    return (truth - predicted).cwiseAbs().mean();
}

std::pair<double, double> default_w_band(
    const CalibrationScenario& s,
    const Eigen::Ref<const Eigen::VectorXd>& w) {
    const double center = quantile(w, 0.5);
    const double half_width = 0.1 * s.sigma_w;
    return {center - half_width, center + half_width};
}

namespace {

// One joint draw of (x, m, w): reuses the sub-study generator with the
// requested number of rows.
StudyDataset sample_joint_rows(const CalibrationScenario& s, RngStream& rng,
                               Eigen::Index n) {
    CalibrationScenario sampled = s;
    sampled.n_sub = n;
    sampled.n_large = 1;  // unused tail draw, kept minimal
    return simulate_calibration(sampled, rng).sub;
}

DensityCurves curves_from_rows(const StudyDataset& sub,
                               std::pair<double, double> w_band);

}  // namespace

DensityCurves conditional_density_curves(const CalibrationScenario& s,
                                         RngStream& rng, Eigen::Index n,
                                         std::pair<double, double> w_band) {
    s.validate();
    if (n <= 0) {
        throw std::invalid_argument("conditional_density_curves: n must be positive");
    }
    if (!(w_band.first < w_band.second)) {
        throw std::invalid_argument(
            "conditional_density_curves: band must be a non-empty interval");
    }
    return curves_from_rows(sample_joint_rows(s, rng, n), w_band);
}

DensityCurves conditional_density_curves(const CalibrationScenario& s,
                                         RngStream& rng, Eigen::Index n) {
    s.validate();
    if (n <= 0) {
        throw std::invalid_argument("conditional_density_curves: n must be positive");
    }
    const StudyDataset sub = sample_joint_rows(s, rng, n);
    return curves_from_rows(sub, default_w_band(s, sub.w));
}

namespace {

DensityCurves curves_from_rows(const StudyDataset& sub,
                               std::pair<double, double> w_band) {
    std::vector<double> x_band, m_band;
    x_band.reserve(static_cast<std::size_t>(sub.rows()) / 8);
    m_band.reserve(static_cast<std::size_t>(sub.rows()) / 8);
    for (Eigen::Index i = 0; i < sub.rows(); ++i) {
        if (sub.w(i) >= w_band.first && sub.w(i) <= w_band.second) {
            x_band.push_back(sub.x(i));
            m_band.push_back(sub.m(i));
        }
    }
    const auto k = static_cast<Eigen::Index>(x_band.size());
    if (k < 100) {
        throw EmptyConditioningBand(
            "conditional_density_curves: only " + std::to_string(k) +
            " rows fall inside the conditioning band (need 100)");
    }

    const Eigen::Map<const Eigen::VectorXd> xb(x_band.data(), k);
    const Eigen::Map<const Eigen::VectorXd> mb(m_band.data(), k);
    const Summary sx = summarize(xb);
    const Summary sm = summarize(mb);

    DensityCurves curves;
    curves.band_lo = w_band.first;
    curves.band_hi = w_band.second;
    curves.n_band = k;
    curves.mean_x = sx.mean;
    curves.mean_m = sm.mean;
    curves.var_x = sx.sd * sx.sd;
    curves.var_m = sm.sd * sm.sd;

    // Shared grid spanning both band-conditional distributions.
    const double lo = std::min(sx.mean - 5.0 * sx.sd, sm.mean - 5.0 * sm.sd);
    const double hi = std::max(sx.mean + 5.0 * sx.sd, sm.mean + 5.0 * sm.sd);
    const Eigen::Index points = 401;
    curves.grid = Eigen::VectorXd::LinSpaced(points, lo, hi);
    curves.density_x = kde(xb, curves.grid);
    curves.density_m = kde(mb, curves.grid);
    return curves;
}

}  // namespace

}  // namespace dietcalib
