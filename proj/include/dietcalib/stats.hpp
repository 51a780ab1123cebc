#pragma once

#include <Eigen/Dense>

#include "dietcalib/rng.hpp"

namespace dietcalib {

// Lower-triangular Cholesky factor L of a symmetric positive definite
// matrix, a.k.a. A = L * L^T.
//
// Throws std::invalid_argument if the matrix is not square/symmetric, and
// NotPositiveDefinite if any pivot is <= 1e-12 — for the unit-diagonal
// correlation matrices this factorization guards, that means an invalid
// correlation configuration rather than a mere scaling issue.
Eigen::MatrixXd cholesky(const Eigen::Ref<const Eigen::MatrixXd>& a);

// Draws `count` rows from a multivariate normal N(mean, cov).
//
// The covariance is factored as D * R * D with D the diagonal of standard
// deviations and R the correlation matrix, so components with zero
// variance are returned as exact constants and badly scaled but valid
// covariances do not trip the positive-definiteness guard. Propagates
// NotPositiveDefinite when R itself is invalid.
//
// Draw order is row-major (all coordinates of row i before row i+1), which
// pins the output bit-for-bit for a given stream state.
Eigen::MatrixXd mvn_sample(RngStream& rng,
                           const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const Eigen::Ref<const Eigen::MatrixXd>& cov,
                           Eigen::Index count);

struct OlsFit {
    double intercept = 0.0;
    double slope = 0.0;
    double residual_variance = 0.0;  // SSR / (n - 2)
    double slope_se = 0.0;
};

// Simple least-squares line y ~ 1 + x.
//
// Throws LengthMismatch if x and y differ in length, std::invalid_argument
// on non-finite input or n < 3, and DegenerateRegressor when x carries no
// variation.
OlsFit ols_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);

// Pearson product-moment correlation.
//
// Throws LengthMismatch on unequal lengths, std::invalid_argument on
// non-finite input or n < 3, and DegenerateRegressor when either vector is
// constant.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);

// Eight-number summary of a sample.
struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // n-1 denominator; NaN when n < 2
    double se = 0.0;  // sd / sqrt(n); NaN when n < 2
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    Eigen::Index n = 0;
};

// Linear-interpolation sample quantile of a sorted copy of `values`
// (the "type 7" convention: h = (n-1)p).
double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double p);

// Mean, sd (n-1), standard error, and five-number spread with
// linear-interpolation quartiles. Throws std::invalid_argument on empty or
// non-finite input. For a single value, sd and se are NaN.
Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& values);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 0.0;  // two-sided
};

// One-sample two-sided t test of H0: mean == mu0.
//
// The p value is computed through the regularized incomplete beta function
// (continued fraction), good to ~1e-10 relative error. Throws
// std::invalid_argument on n < 3 or non-finite input, DegenerateRegressor
// when the sample standard deviation is zero.
TTestResult one_sample_t(const Eigen::Ref<const Eigen::VectorXd>& values,
                         double mu0);

// Regularized incomplete beta function I_x(a, b); exposed for tests.
double incomplete_beta(double a, double b, double x);

}  // namespace dietcalib
