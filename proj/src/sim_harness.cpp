#include "dietcalib/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "dietcalib/errors.hpp"

namespace dietcalib {
namespace {

// Natural logs of the source study's intake and self-report parameters.
const double kMuX = std::log(2141.0);
const double kSigmaX = std::log(14.0);
const double kMuW = std::log(1485.0);
const double kSigmaW = std::log(28.0);
const double kSigmaR = std::log(21.0);

// Runs one task per (cell, replicate) pair over a small worker pool and
// stores each result at its own index, so the output never depends on
// scheduling. Exceptions from workers are rethrown on the caller thread.
template <typename Fn>
void run_tasks(std::size_t total, int workers, Fn&& fn) {
    unsigned n_workers = workers > 0
                             ? static_cast<unsigned>(workers)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(
        n_workers, static_cast<unsigned>(std::max<std::size_t>(total, 1)));

    if (n_workers <= 1) {
        for (std::size_t i = 0; i < total; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

}  // namespace

std::string format_double(double value) {
    char buffer[32];
    const auto result =
        std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (result.ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buffer, result.ptr);
}

CalibrationScenario CalibrationGrid::cell(std::size_t index) const {
    const std::size_t n_l = lambdas_wx.size();
    const std::size_t n_r = rhos_mw.size();
    if (index >= cells()) {
        throw std::out_of_range("CalibrationGrid::cell: index out of range");
    }
    CalibrationScenario s = base;
    s.alpha = alphas[index / (n_l * n_r)];
    s.lambda_wx = lambdas_wx[(index / n_r) % n_l];
    s.rho_mw = rhos_mw[index % n_r];
    return s;
}

std::string CalibrationGrid::scenario_id(std::size_t index) const {
    const CalibrationScenario s = cell(index);
    return "calib/a" + format_double(s.alpha) + "/l" +
           format_double(s.lambda_wx) + "/r" + format_double(s.rho_mw);
}

TriadScenario TriadGrid::cell(std::size_t index) const {
    const std::size_t n_r = rhos_rw.size();
    if (index >= cells()) {
        throw std::out_of_range("TriadGrid::cell: index out of range");
    }
    TriadScenario s = base;
    const auto& pair = lambda_pairs[index / n_r];
    s.lambda(1) = pair.first;   // reference instrument
    s.lambda(2) = pair.second;  // self-report
    s.rho_rw = rhos_rw[index % n_r];
    return s;
}

std::string TriadGrid::scenario_id(std::size_t index) const {
    const TriadScenario s = cell(index);
    return "triad/l" + format_double(s.lambda(1)) + "-" +
           format_double(s.lambda(2)) + "/r" + format_double(s.rho_rw);
}

CalibrationGrid default_calibration_grid() {
    CalibrationGrid grid;
    grid.base.mu_x = kMuX;
    grid.base.sigma_x = kSigmaX;
    grid.base.mu_m = 0.0;
    grid.base.lambda_mx = 1.0;
    grid.base.mu_w = kMuW;
    grid.base.sigma_w = kSigmaW;
    grid.base.n_sub = 1000;
    grid.base.n_large = 10000;
    grid.alphas = {0.5, 1.0, 2.0};
    grid.lambdas_wx = {0.1, 0.5, 0.8};
    grid.rhos_mw = {0.0, 0.1, 0.8};
    grid.replicates = 500;
    return grid;
}

TriadGrid default_triad_grid() {
    TriadGrid grid;
    grid.base.mu_x = kMuX;
    grid.base.sigma_x = kSigmaX;
    grid.base.mu = Eigen::Vector3d(0.0, 0.0, kMuW);
    grid.base.lambda = Eigen::Vector3d(1.0, 0.95, 0.9);
    grid.base.sigma =
        Eigen::Vector3d(sigma_m_from_alpha(0.5, kSigmaX), kSigmaR, kSigmaW);
    grid.base.rho_mr = 0.0;
    grid.base.rho_mw = 0.0;
    grid.base.rho_rw = 0.0;
    grid.base.n = 1000;
    grid.lambda_pairs = {{0.95, 0.9}, {0.8, 0.5}};
    grid.rhos_rw = {0.0, 0.1, 0.3, 0.5};
    grid.replicates = 500;
    return grid;
}

std::vector<CalibrationRecord> run_calibration_study(
    const CalibrationGrid& grid, std::uint64_t master_seed, int workers) {
    if (grid.replicates < 1) {
        throw std::invalid_argument("run_calibration_study: replicates must be >= 1");
    }
    const std::size_t n_cells = grid.cells();
    const auto reps = static_cast<std::size_t>(grid.replicates);

    // Validate every cell (and precompute ids/targets) before any work.
    std::vector<CalibrationScenario> scenarios(n_cells);
    std::vector<std::string> ids(n_cells);
    std::vector<TrueCoefficients> targets(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        scenarios[c] = grid.cell(c);
        scenarios[c].validate();
        ids[c] = grid.scenario_id(c);
        targets[c] = true_coefficients(scenarios[c]);
    }

    std::vector<CalibrationRecord> records(n_cells * reps);
    run_tasks(records.size(), workers, [&](std::size_t task) {
        const std::size_t c = task / reps;
        const std::size_t r = task % reps;
        const CalibrationScenario& s = scenarios[c];

        RngStream rng(master_seed, compose_stream_id(c, r));
        const CalibrationStudies studies = simulate_calibration(s, rng);
        const CalibrationFit fit = fit_calibration(studies.sub);
        const Eigen::VectorXd predicted = predict_intake(fit, studies.large);

        CalibrationRecord& rec = records[task];
        rec.scenario_id = ids[c];
        rec.alpha = s.alpha;
        rec.lambda_wx = s.lambda_wx;
        rec.rho_mw = s.rho_mw;
        rec.replicate = static_cast<int>(r);
        rec.beta0_hat = fit.beta0;
        rec.beta1_hat = fit.beta1;
        rec.tilde_beta1 = targets[c].tilde_beta1;
        rec.apparent_beta1 = targets[c].apparent_beta1;
        rec.ratio = fit.beta1 / targets[c].tilde_beta1;
        rec.mae = mean_absolute_error(studies.large.x, predicted);
    });

    std::sort(records.begin(), records.end(),
              [](const CalibrationRecord& a, const CalibrationRecord& b) {
                  if (a.scenario_id != b.scenario_id)
                      return a.scenario_id < b.scenario_id;
                  return a.replicate < b.replicate;
              });
    return records;
}

std::vector<TriadRecord> run_triads_study(const TriadGrid& grid,
                                          std::uint64_t master_seed,
                                          int workers) {
    if (grid.replicates < 1) {
        throw std::invalid_argument("run_triads_study: replicates must be >= 1");
    }
    const std::size_t n_cells = grid.cells();
    const auto reps = static_cast<std::size_t>(grid.replicates);

    std::vector<TriadScenario> scenarios(n_cells);
    std::vector<std::string> ids(n_cells);
    std::vector<double> truths(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        scenarios[c] = grid.cell(c);
        scenarios[c].validate();
        ids[c] = grid.scenario_id(c);
        truths[c] = true_vc(scenarios[c]);
    }

    std::vector<TriadRecord> records(n_cells * reps);
    run_tasks(records.size(), workers, [&](std::size_t task) {
        const std::size_t c = task / reps;
        const std::size_t r = task % reps;
        const TriadScenario& s = scenarios[c];

        RngStream rng(master_seed, compose_stream_id(c, r));
        const StudyDataset data = simulate_triads(s, rng);
        const TriadEstimate est = estimate_vc(data);

        TriadRecord& rec = records[task];
        rec.scenario_id = ids[c];
        rec.lambda_rx = s.lambda(1);
        rec.lambda_wx = s.lambda(2);
        rec.rho_rw = s.rho_rw;
        rec.replicate = static_cast<int>(r);
        rec.rho_mw_hat = est.rho_mw_hat;
        rec.rho_wr_hat = est.rho_wr_hat;
        rec.rho_mr_hat = est.rho_mr_hat;
        rec.vc_hat = est.vc_hat;
        rec.vc_true = truths[c];
        rec.status = est.status;
    });

    std::sort(records.begin(), records.end(),
              [](const TriadRecord& a, const TriadRecord& b) {
                  if (a.scenario_id != b.scenario_id)
                      return a.scenario_id < b.scenario_id;
                  return a.replicate < b.replicate;
              });
    return records;
}

namespace {

Summary summarize_vector(const std::vector<double>& values) {
    const Eigen::Map<const Eigen::VectorXd> view(
        values.data(), static_cast<Eigen::Index>(values.size()));
    return summarize(view);
}

}  // namespace

std::vector<ScenarioSummary> aggregate(
    const std::vector<CalibrationRecord>& records) {
    std::vector<ScenarioSummary> out;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() &&
               records[j].scenario_id == records[i].scenario_id) {
            ++j;
        }

        ScenarioSummary s;
        s.scenario_id = records[i].scenario_id;
        s.params = {{"alpha", records[i].alpha},
                    {"lambda_wx", records[i].lambda_wx},
                    {"rho_mw", records[i].rho_mw}};
        s.n_ok = static_cast<int>(j - i);
        s.p_value_vs_truth = std::numeric_limits<double>::quiet_NaN();

        const std::pair<const char*, double CalibrationRecord::*> fields[] = {
            {"beta0_hat", &CalibrationRecord::beta0_hat},
            {"beta1_hat", &CalibrationRecord::beta1_hat},
            {"tilde_beta1", &CalibrationRecord::tilde_beta1},
            {"apparent_beta1", &CalibrationRecord::apparent_beta1},
            {"ratio", &CalibrationRecord::ratio},
            {"mae", &CalibrationRecord::mae},
        };
        for (const auto& [name, member] : fields) {
            std::vector<double> column;
            column.reserve(j - i);
            for (std::size_t k = i; k < j; ++k) {
                column.push_back(records[k].*member);
            }
            s.metrics.push_back({name, summarize_vector(column)});
        }
        out.push_back(std::move(s));
        i = j;
    }
    return out;
}

std::vector<ScenarioSummary> aggregate(const std::vector<TriadRecord>& records) {
    std::vector<ScenarioSummary> out;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() &&
               records[j].scenario_id == records[i].scenario_id) {
            ++j;
        }

        ScenarioSummary s;
        s.scenario_id = records[i].scenario_id;
        s.params = {{"lambda_rx", records[i].lambda_rx},
                    {"lambda_wx", records[i].lambda_wx},
                    {"rho_rw", records[i].rho_rw},
                    {"vc_true", records[i].vc_true}};

        std::vector<double> mw, wr, mr, vc;
        for (std::size_t k = i; k < j; ++k) {
            const TriadRecord& r = records[k];
            switch (r.status) {
                case TriadStatus::ok:
                    ++s.n_ok;
                    mw.push_back(r.rho_mw_hat);
                    wr.push_back(r.rho_wr_hat);
                    mr.push_back(r.rho_mr_hat);
                    vc.push_back(r.vc_hat);
                    break;
                case TriadStatus::heywood:
                    ++s.n_heywood;
                    break;
                case TriadStatus::negative_correlation:
                    ++s.n_negative;
                    break;
            }
        }

        s.p_value_vs_truth = std::numeric_limits<double>::quiet_NaN();
        if (s.n_ok > 0) {
            s.metrics.push_back({"rho_mw_hat", summarize_vector(mw)});
            s.metrics.push_back({"rho_wr_hat", summarize_vector(wr)});
            s.metrics.push_back({"rho_mr_hat", summarize_vector(mr)});
            s.metrics.push_back({"vc_hat", summarize_vector(vc)});
            if (s.n_ok >= 3) {
                const Eigen::Map<const Eigen::VectorXd> view(
                    vc.data(), static_cast<Eigen::Index>(vc.size()));
                const Summary vs = summarize(view);
                if (vs.sd > 0.0) {
                    s.p_value_vs_truth =
                        one_sample_t(view, records[i].vc_true).p_value;
                }
            }
        }
        out.push_back(std::move(s));
        i = j;
    }
    return out;
}

const char* to_string(TriadStatus status) {
    switch (status) {
        case TriadStatus::ok: return "ok";
        case TriadStatus::heywood: return "heywood";
        case TriadStatus::negative_correlation: return "negative_correlation";
    }
    throw std::logic_error("to_string: unknown triad status");
}

TriadStatus triad_status_from_string(const std::string& text) {
    if (text == "ok") return TriadStatus::ok;
    if (text == "heywood") return TriadStatus::heywood;
    if (text == "negative_correlation") return TriadStatus::negative_correlation;
    throw std::invalid_argument("unknown triad status: " + text);
}

}  // namespace dietcalib
