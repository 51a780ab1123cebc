#include "dietcalib/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dietcalib/errors.hpp"

namespace dietcalib {
namespace {

constexpr double kPivotFloor = 1e-12;

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v,
                    const char* what) {
    if (!v.allFinite()) {
        throw std::invalid_argument(std::string(what) +
                                    ": non-finite values are not admitted");
    }
}

}  // namespace

Eigen::MatrixXd cholesky(const Eigen::Ref<const Eigen::MatrixXd>& a) {
    const Eigen::Index n = a.rows();
    if (n == 0 || a.cols() != n) {
        throw std::invalid_argument("cholesky: matrix must be square and non-empty");
    }
    if (!a.allFinite()) {
        throw std::invalid_argument("cholesky: non-finite entries");
    }
    const double scale = a.cwiseAbs().maxCoeff();
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
        throw std::invalid_argument("cholesky: matrix is not symmetric");
    }

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - L.row(j).head(j).squaredNorm();
        if (pivot <= kPivotFloor) {
            throw NotPositiveDefinite(
                "cholesky: pivot " + std::to_string(pivot) + " at index " +
                std::to_string(j) +
                " — matrix is not positive definite (invalid correlation "
                "configuration)");
        }
        L(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            L(i, j) = (a(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
        }
    }
    return L;
}

Eigen::MatrixXd mvn_sample(RngStream& rng,
                           const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const Eigen::Ref<const Eigen::MatrixXd>& cov,
                           Eigen::Index count) {
    const Eigen::Index d = mean.size();
    if (d == 0 || cov.rows() != d || cov.cols() != d) {
        throw std::invalid_argument("mvn_sample: mean/covariance shape mismatch");
    }
    if (count < 0) {
        throw std::invalid_argument("mvn_sample: negative sample count");
    }
    if (!cov.allFinite() || !mean.allFinite()) {
        throw std::invalid_argument("mvn_sample: non-finite parameters");
    }

    // Split the covariance into sd * correlation * sd. Zero-variance
    // components are legal degenerate constants as long as their
    // covariances vanish too.
    Eigen::VectorXd sd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (cov(i, i) < 0.0) {
            throw NotPositiveDefinite("mvn_sample: negative variance on diagonal");
        }
        sd(i) = std::sqrt(cov(i, i));
    }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            if (sd(i) == 0.0 || sd(j) == 0.0) {
                if (cov(i, j) != 0.0) {
                    throw NotPositiveDefinite(
                        "mvn_sample: zero-variance component with non-zero "
                        "covariance");
                }
            } else {
                corr(i, j) = cov(i, j) / (sd(i) * sd(j));
            }
        }
    }
    const Eigen::MatrixXd L = cholesky(corr);
    // Row form of draws = mean + diag(sd) * L * z.
    const Eigen::MatrixXd shaper = (sd.asDiagonal() * L).transpose();

    Eigen::MatrixXd z(count, d);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            z(i, j) = rng.next_normal();
        }
    }
    Eigen::MatrixXd out = z * shaper;
    out.rowwise() += mean.transpose();
    return out;
}

OlsFit ols_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) {
        throw LengthMismatch("ols_fit: x and y differ in length");
    }
    const Eigen::Index n = x.size();
    if (n < 3) {
        throw std::invalid_argument("ols_fit: need at least 3 observations");
    }
    require_finite(x, "ols_fit");
    require_finite(y, "ols_fit");

    const double x_mean = x.mean();
    const double y_mean = y.mean();
    const Eigen::VectorXd xc = x.array() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    const double sxx = xc.squaredNorm();
    if (sxx <= 0.0) {
        throw DegenerateRegressor("ols_fit: regressor has zero variance");
    }

    OlsFit fit;
    fit.slope = xc.dot(yc) / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    const double ssr = (yc - fit.slope * xc).squaredNorm();
    fit.residual_variance = ssr / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(fit.residual_variance / sxx);
    return fit;
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) {
        throw LengthMismatch("pearson: x and y differ in length");
    }
    const Eigen::Index n = x.size();
    if (n < 3) {
        throw std::invalid_argument("pearson: need at least 3 observations");
    }
    require_finite(x, "pearson");
    require_finite(y, "pearson");

    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double sxx = xc.squaredNorm();
    const double syy = yc.squaredNorm();
    if (sxx <= 0.0 || syy <= 0.0) {
        throw DegenerateRegressor("pearson: constant input has no correlation");
    }
    return xc.dot(yc) / std::sqrt(sxx * syy);
}

double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double p) {
    if (values.size() == 0) {
        throw std::invalid_argument("quantile: empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile: p outside [0, 1]");
    }
    require_finite(values, "quantile");

    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const Eigen::Index n = values.size();
    if (n == 0) {
        throw std::invalid_argument("summarize: empty sample");
    }
    require_finite(values, "summarize");

    Summary s;
    s.n = n;
    s.mean = values.mean();
    if (n > 1) {
        const double ss = (values.array() - s.mean).matrix().squaredNorm();
        s.sd = std::sqrt(ss / static_cast<double>(n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(n));
    } else {
        s.sd = std::numeric_limits<double>::quiet_NaN();
        s.se = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<double> sorted(values.data(), values.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const Eigen::Map<const Eigen::VectorXd> view(sorted.data(),
                                                 static_cast<Eigen::Index>(n));
    s.min = sorted.front();
    s.q1 = quantile(view, 0.25);
    s.median = quantile(view, 0.5);
    s.q3 = quantile(view, 0.75);
    s.max = sorted.back();
    return s;
}

namespace {

// Continued-fraction core of the regularized incomplete beta function
// (modified Lentz iteration).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) {
            return h;
        }
    }
    throw std::runtime_error("incomplete_beta: continued fraction failed to converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("incomplete_beta: a and b must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                             std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The continued fraction converges fast on the side where x is below
    // the distribution's bulk; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    // on the other side.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

TTestResult one_sample_t(const Eigen::Ref<const Eigen::VectorXd>& values,
                         double mu0) {
    const Eigen::Index n = values.size();
    if (n < 3) {
        throw std::invalid_argument("one_sample_t: need at least 3 observations");
    }
    require_finite(values, "one_sample_t");
    if (!std::isfinite(mu0)) {
        throw std::invalid_argument("one_sample_t: mu0 must be finite");
    }

    const double mean = values.mean();
    const double ss = (values.array() - mean).matrix().squaredNorm();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd <= 0.0) {
        throw DegenerateRegressor("one_sample_t: zero sample standard deviation");
    }

    TTestResult result;
    result.df = static_cast<double>(n - 1);
    result.t = (mean - mu0) / (sd / std::sqrt(static_cast<double>(n)));
    // Two-sided tail mass of the t distribution via the incomplete beta.
    const double x = result.df / (result.df + result.t * result.t);
    result.p_value = incomplete_beta(result.df / 2.0, 0.5, x);
    return result;
}

}  // namespace dietcalib
