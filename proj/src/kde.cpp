#include "dietcalib/kde.hpp"

#include <cmath>
#include <stdexcept>

#include "dietcalib/stats.hpp"

namespace dietcalib {

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples) {
    const Eigen::Index n = samples.size();
    if (n == 0) {
        throw std::invalid_argument("silverman_bandwidth: empty sample");
    }
    if (!samples.allFinite()) {
        throw std::invalid_argument("silverman_bandwidth: non-finite values");
    }

    const double mean = samples.mean();
    double sd = 0.0;
    if (n > 1) {
        sd = std::sqrt((samples.array() - mean).matrix().squaredNorm() /
                       static_cast<double>(n - 1));
    }
    const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);

    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) spread = std::fabs(mean);
    if (!(spread > 0.0)) spread = 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

Eigen::VectorXd kde(const Eigen::Ref<const Eigen::VectorXd>& samples,
                    const Eigen::Ref<const Eigen::VectorXd>& grid) {
    if (grid.size() == 0) {
        throw std::invalid_argument("kde: empty grid");
    }
    if (!grid.allFinite()) {
        throw std::invalid_argument("kde: non-finite grid");
    }
    const double h = silverman_bandwidth(samples);
    const double norm =
        1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * M_PI));

    Eigen::VectorXd density(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const Eigen::ArrayXd u = (grid(g) - samples.array()) / h;
        density(g) = norm * (-0.5 * u.square()).exp().sum();
    }
    return density;
}

}  // namespace dietcalib
