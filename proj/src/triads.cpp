#include "dietcalib/triads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dietcalib/errors.hpp"
#include "dietcalib/stats.hpp"

namespace dietcalib {

namespace {

// Cauchy-Schwarz bounds a correlation to [-1, 1]; the sample formula can
// land an ulp outside on exactly collinear data.
double clamp_correlation(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

TriadEstimate estimate_vc(const StudyDataset& data) {
    if (!data.has_m() || !data.has_r() || data.w.size() == 0) {
        throw std::invalid_argument("estimate_vc: dataset must carry m, r, and w");
    }

    TriadEstimate est;
    est.rho_mw_hat = clamp_correlation(pearson(data.m, data.w));
    est.rho_wr_hat = clamp_correlation(pearson(data.w, data.r));
    est.rho_mr_hat = clamp_correlation(pearson(data.m, data.r));

    if (est.rho_mw_hat <= 0.0 || est.rho_wr_hat <= 0.0 ||
        est.rho_mr_hat <= 0.0) {
        est.status = TriadStatus::negative_correlation;
        est.vc_hat = std::numeric_limits<double>::quiet_NaN();
        return est;
    }

    const double ratio = est.rho_mw_hat * est.rho_wr_hat / est.rho_mr_hat;
    est.vc_hat = std::sqrt(ratio);
    est.status = ratio > 1.0 ? TriadStatus::heywood : TriadStatus::ok;
    return est;
}

double true_vc(const TriadScenario& s) {
    s.validate();
    const double lw = s.lambda(2);
    const double num = lw * s.sigma_x;
    return num / std::sqrt(num * num + s.sigma(2) * s.sigma(2));
}

double population_vc_triad_product(const TriadScenario& s) {
    s.validate();
    const Eigen::Matrix3d omega = marginal_covariance_triads(s);
    const double rho_mw = omega(0, 2) / std::sqrt(omega(0, 0) * omega(2, 2));
    const double rho_wr = omega(1, 2) / std::sqrt(omega(1, 1) * omega(2, 2));
    const double rho_mr = omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1));
    if (rho_mw <= 0.0 || rho_wr <= 0.0 || rho_mr <= 0.0) {
        throw NotPositiveDefinite(
            "population_vc_triad_product: a population correlation in the "
            "triad ratio is not positive");
    }
    return std::sqrt(rho_mw * rho_wr / rho_mr);
}

}  // namespace dietcalib
