#pragma once

#include <Eigen/Dense>

namespace dietcalib {

// Silverman's rule-of-thumb bandwidth for a Gaussian kernel:
//     h = 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
// Falls back like R's bw.nrd0 when the spread collapses (IQR == 0 uses the
// sd; an all-equal sample uses |mean|, then 1.0) so the bandwidth is always
// strictly positive. Throws std::invalid_argument on empty or non-finite
// input.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples);

// Gaussian kernel density estimate of `samples` evaluated at each point of
// `grid`, using the Silverman bandwidth above. Throws
// std::invalid_argument on empty or non-finite input.
Eigen::VectorXd kde(const Eigen::Ref<const Eigen::VectorXd>& samples,
                    const Eigen::Ref<const Eigen::VectorXd>& grid);

}  // namespace dietcalib
