#pragma once

#include <stdexcept>
#include <string>

namespace dietcalib {

// A symmetric matrix handed to the Cholesky factorization was not positive
// definite (zero or negative pivot). Usually indicates an invalid
// correlation configuration.
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The regressor in a least-squares fit carries no variation, or a sample
// statistic that requires spread (e.g. a t statistic denominator) is zero.
struct DegenerateRegressor : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scenario loading coefficient that must be non-zero was zero.
struct ZeroLoading : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Paired vectors disagree in length.
struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The conditioning band selected too few rows to estimate densities.
struct EmptyConditioningBand : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested analysis is only valid under model assumptions that do not
// hold for the supplied scenario.
struct AssumptionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A configuration file or flag set failed validation. The message carries
// the offending key path and the reason.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file could not be read, parsed, or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plot records do not cover every cell of a requested facet.
struct FacetMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dietcalib
