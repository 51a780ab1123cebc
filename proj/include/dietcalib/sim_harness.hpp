#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dietcalib/calibration.hpp"
#include "dietcalib/measurement_model.hpp"
#include "dietcalib/stats.hpp"
#include "dietcalib/triads.hpp"

namespace dietcalib {

inline constexpr std::uint64_t kDefaultMasterSeed = 20180001ull;

// Factorial grid for the calibration study: every combination of alpha,
// lambda_wx, rho_mw layered over a base scenario.
struct CalibrationGrid {
    CalibrationScenario base;
    std::vector<double> alphas;
    std::vector<double> lambdas_wx;
    std::vector<double> rhos_mw;
    int replicates = 0;

    std::size_t cells() const {
        return alphas.size() * lambdas_wx.size() * rhos_mw.size();
    }
    // Scenario for flat cell index (alpha-major, then lambda, then rho).
    CalibrationScenario cell(std::size_t index) const;
    std::string scenario_id(std::size_t index) const;
};

// Grid for the triads study: loading pairs (lambda_rx, lambda_wx) crossed
// with the R-W error correlation.
struct TriadGrid {
    TriadScenario base;
    std::vector<std::pair<double, double>> lambda_pairs;  // (lambda_rx, lambda_wx)
    std::vector<double> rhos_rw;
    int replicates = 0;

    std::size_t cells() const { return lambda_pairs.size() * rhos_rw.size(); }
    TriadScenario cell(std::size_t index) const;
    std::string scenario_id(std::size_t index) const;
};

// The simulation design of the source study: intake distributed as
// log-normal with mu_x = ln 2141, sigma_x = ln 14; self-report with
// mu_w = ln 1485, sigma_w = ln 28, crossed over
//     alpha     in {0.5, 1, 2}
//     lambda_wx in {0.1, 0.5, 0.8}
//     rho_mw    in {0, 0.1, 0.8}
// with a sub-study of 1000, a large study of 10000, and 500 replicates.
CalibrationGrid default_calibration_grid();

// Triads design: loadings (lambda_rx, lambda_wx) in {(0.95, 0.9),
// (0.8, 0.5)} with lambda_mx = 1, rho_rw in {0, 0.1, 0.3, 0.5}, error sds
// (0.5 sigma_x, ln 21, ln 28), n = 1000, 500 replicates.
TriadGrid default_triad_grid();

// One replicate of the calibration procedure: fitted coefficients, the
// closed-form targets, the slope ratio, and the prediction error on the
// large study.
struct CalibrationRecord {
    std::string scenario_id;
    double alpha = 0.0;
    double lambda_wx = 0.0;
    double rho_mw = 0.0;
    int replicate = 0;
    double beta0_hat = 0.0;
    double beta1_hat = 0.0;
    double tilde_beta1 = 0.0;
    double apparent_beta1 = 0.0;
    double ratio = 0.0;  // beta1_hat / tilde_beta1
    double mae = 0.0;    // against retained truth, log scale
};

// One replicate of the triads procedure.
struct TriadRecord {
    std::string scenario_id;
    double lambda_rx = 0.0;
    double lambda_wx = 0.0;
    double rho_rw = 0.0;
    int replicate = 0;
    double rho_mw_hat = 0.0;
    double rho_wr_hat = 0.0;
    double rho_mr_hat = 0.0;
    double vc_hat = 0.0;  // NaN when undefined
    double vc_true = 0.0;
    TriadStatus status = TriadStatus::ok;
};

// Runs every (cell, replicate) of the grid. Replicate r of cell c draws
// from stream compose_stream_id(c, r) of `master_seed`, and records land
// sorted by (scenario_id, replicate) — so the output is a pure function of
// (grid, master_seed), independent of scheduling. `workers` caps the
// number of worker threads (0 picks the hardware concurrency).
std::vector<CalibrationRecord> run_calibration_study(
    const CalibrationGrid& grid, std::uint64_t master_seed, int workers = 0);

std::vector<TriadRecord> run_triads_study(const TriadGrid& grid,
                                          std::uint64_t master_seed,
                                          int workers = 0);

// Per-scenario summary of replicate metrics. Only rows with status ok are
// aggregated; Heywood and negative-correlation rows are counted but never
// averaged.
struct MetricSummary {
    std::string name;
    Summary stats;
};

struct ScenarioSummary {
    std::string scenario_id;
    std::vector<std::pair<std::string, double>> params;
    int n_ok = 0;
    int n_heywood = 0;
    int n_negative = 0;
    std::vector<MetricSummary> metrics;
    // One-sample t test of vc_hat against the closed-form truth (triads
    // only; NaN when not computable).
    double p_value_vs_truth = 0.0;
};

std::vector<ScenarioSummary> aggregate(
    const std::vector<CalibrationRecord>& records);
std::vector<ScenarioSummary> aggregate(const std::vector<TriadRecord>& records);

const char* to_string(TriadStatus status);
TriadStatus triad_status_from_string(const std::string& text);

// Shortest decimal text that parses back to exactly the same double;
// scenario-id components use this format.
std::string format_double(double value);

}  // namespace dietcalib
