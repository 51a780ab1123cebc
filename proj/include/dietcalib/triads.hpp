#pragma once

#include "dietcalib/measurement_model.hpp"

namespace dietcalib {

enum class TriadStatus { ok, heywood, negative_correlation };

// Method-of-triads validity-coefficient estimate from one dataset.
//
// vc_hat = sqrt(rho_mw_hat * rho_wr_hat / rho_mr_hat) estimates the
// correlation between W and the latent intake X. The estimate is only a
// valid correlation when status == ok:
//   - heywood: the ratio under the root exceeded 1; vc_hat carries the raw
//     (> 1) value for diagnostics but must not enter aggregates.
//   - negative_correlation: an observed pairwise correlation was <= 0, the
//     root is undefined, and vc_hat is NaN.
struct TriadEstimate {
    double rho_mw_hat = 0.0;
    double rho_wr_hat = 0.0;
    double rho_mr_hat = 0.0;
    double vc_hat = 0.0;
    TriadStatus status = TriadStatus::ok;
};

// Computes the three pairwise correlations and the triad estimate for W.
// Requires a dataset with m, r, w present (std::invalid_argument
// otherwise). Statuses are data outcomes, not errors: Heywood cases and
// negative correlations return normally with the matching status.
TriadEstimate estimate_vc(const StudyDataset& data);

// Closed-form validity coefficient of W,
//     corr(W, X) = lambda_wx sigma_x / sqrt(lambda_wx^2 sigma_x^2 + sigma_w^2),
// from the scenario's W components (lambda[2], sigma[2]).
double true_vc(const TriadScenario& s);

// Closed-form probability limit of the triad estimate: the value of
// sqrt(rho_mw rho_wr / rho_mr) evaluated at the population correlations
// implied by the scenario. Coincides with true_vc(s) exactly when all
// error correlations vanish; correlated errors inflate it. Throws
// NotPositiveDefinite when a population correlation in the ratio is <= 0.
double population_vc_triad_product(const TriadScenario& s);

}  // namespace dietcalib
