#include "dietcalib/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dietcalib/config.hpp"
#include "dietcalib/csv.hpp"
#include "dietcalib/errors.hpp"
#include "dietcalib/figures.hpp"
#include "dietcalib/sim_harness.hpp"

namespace dietcalib {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

constexpr const char* kSeedEnvVar = "DIETCALIB_SEED";

// Flags accepted by `run`.
struct RunFlags {
    std::string study;
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    bool emit_svg = false;
    int workers = 0;
};

std::uint64_t seed_from_environment(std::uint64_t fallback) {
    const char* text = std::getenv(kSeedEnvVar);
    if (text == nullptr || *text == '\0') return fallback;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text, &end, 10);
    if (end == text || *end != '\0') {
        throw ConfigError(std::string(kSeedEnvVar) +
                          ": expected a non-negative integer, got '" + text +
                          "'");
    }
    return static_cast<std::uint64_t>(value);
}

// Assembles the effective RunConfig. Precedence, lowest to highest:
// built-in defaults, DIETCALIB_SEED, config file, explicit flags.
RunConfig resolve_run_config(const RunFlags& flags) {
    StudyKind flag_study = StudyKind::calibration;
    const bool study_flag_given = !flags.study.empty();
    if (study_flag_given) {
        flag_study = study_kind_from_string(flags.study);
    }

    RunConfig config;
    if (!flags.config_path.empty()) {
        config = parse_config_file(flags.config_path, flag_study);
    } else {
        config = default_run_config();
        config.study = flag_study;
    }
    if (study_flag_given) {
        config.study = flag_study;
    }

    // The environment overrides the built-in default seed only; explicit
    // config or flag values win.
    const bool config_has_seed = config.master_seed != kDefaultMasterSeed;
    if (!config_has_seed) {
        config.master_seed = seed_from_environment(kDefaultMasterSeed);
    }
    if (flags.seed) config.master_seed = *flags.seed;
    if (flags.replicates) {
        config.calibration.replicates = *flags.replicates;
        config.triads.replicates = *flags.replicates;
    }
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    if (flags.emit_svg) config.emit_svg = true;
    return config;
}

// Validates every scenario the run will touch, so bad configurations fail
// before any simulation starts.
void validate_run_config(const RunConfig& config) {
    try {
        if (config.study == StudyKind::calibration) {
            if (config.calibration.replicates < 1) {
                throw std::invalid_argument("replicates must be at least 1");
            }
            for (std::size_t c = 0; c < config.calibration.cells(); ++c) {
                config.calibration.cell(c).validate();
            }
        } else if (config.study == StudyKind::triads) {
            if (config.triads.replicates < 1) {
                throw std::invalid_argument("replicates must be at least 1");
            }
            for (std::size_t c = 0; c < config.triads.cells(); ++c) {
                config.triads.cell(c).validate();
            }
        } else {
            const DensityConfig& d = config.density;
            CalibrationScenario s = default_calibration_grid().base;
            s.alpha = d.alpha;
            s.lambda_wx = d.lambda_wx;
            s.n_sub = d.n;
            for (double rho : d.rhos_mw) {
                s.rho_mw = rho;
                s.validate();
            }
        }
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid scenario configuration: ") +
                          e.what());
    }
}

std::string path_join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void emit_calibration_figures(const std::vector<CalibrationRecord>& records,
                              const std::vector<double>& rhos,
                              const std::string& out_dir,
                              std::vector<std::string>& written) {
    for (double rho : rhos) {
        const std::string tag = "rho" + format_double(rho);
        const std::string ratio_svg = path_join(out_dir, "ratio_box_" + tag + ".svg");
        emit_ratio_box(records, rho, ratio_svg);
        written.push_back(ratio_svg);
        written.push_back(companion_csv_path(ratio_svg));
        const std::string mae_svg = path_join(out_dir, "mae_box_" + tag + ".svg");
        emit_mae_box(records, rho, mae_svg);
        written.push_back(mae_svg);
        written.push_back(companion_csv_path(mae_svg));
    }
}

void emit_triads_figures(const std::vector<TriadRecord>& records,
                         const std::vector<std::pair<double, double>>& pairs,
                         const std::string& out_dir,
                         std::vector<std::string>& written) {
    for (const auto& [lrx, lwx] : pairs) {
        const std::string svg =
            path_join(out_dir, "vc_strip_l" + format_double(lrx) + "-" +
                                   format_double(lwx) + ".svg");
        emit_vc_strip(records, lrx, lwx, svg);
        written.push_back(svg);
        written.push_back(companion_csv_path(svg));
    }
}

int run_command(const RunFlags& flags) {
    RunConfig config;
    try {
        config = resolve_run_config(flags);
        validate_run_config(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        std::vector<std::string> written;
        if (config.study == StudyKind::calibration) {
            const auto records = run_calibration_study(
                config.calibration, config.master_seed, flags.workers);
            const std::string replicates_path =
                path_join(config.output_dir, "replicates_calibration.csv");
            write_replicates_csv(records, replicates_path);
            written.push_back(replicates_path);
            const std::string summary_path =
                path_join(config.output_dir, "summary_calibration.csv");
            write_summary_csv(aggregate(records), summary_path);
            written.push_back(summary_path);
            if (config.emit_svg) {
                emit_calibration_figures(records, config.calibration.rhos_mw,
                                         config.output_dir, written);
            }
        } else if (config.study == StudyKind::triads) {
            const auto records = run_triads_study(config.triads,
                                                  config.master_seed,
                                                  flags.workers);
            const std::string replicates_path =
                path_join(config.output_dir, "replicates_triads.csv");
            write_replicates_csv(records, replicates_path);
            written.push_back(replicates_path);
            const std::string summary_path =
                path_join(config.output_dir, "summary_triads.csv");
            write_summary_csv(aggregate(records), summary_path);
            written.push_back(summary_path);
            if (config.emit_svg) {
                emit_triads_figures(records, config.triads.lambda_pairs,
                                    config.output_dir, written);
            }
        } else {
            const DensityConfig& d = config.density;
            CalibrationScenario s = default_calibration_grid().base;
            s.alpha = d.alpha;
            s.lambda_wx = d.lambda_wx;
            for (std::size_t panel = 0; panel < d.rhos_mw.size(); ++panel) {
                s.rho_mw = d.rhos_mw[panel];
                RngStream rng(config.master_seed, compose_stream_id(panel, 0));
                const DensityCurves curves =
                    conditional_density_curves(s, rng, d.n);
                const std::string tag =
                    "rho" + format_double(d.rhos_mw[panel]);
                const std::string csv_path =
                    path_join(config.output_dir, "density_" + tag + ".csv");
                if (config.emit_svg) {
                    const std::string svg_path = path_join(
                        config.output_dir, "density_" + tag + ".svg");
                    emit_density(curves,
                                 "conditional densities, rho_mw = " +
                                     format_double(d.rhos_mw[panel]),
                                 svg_path);
                    written.push_back(svg_path);
                } else {
                    write_density_csv(curves, csv_path);
                }
                written.push_back(csv_path);
            }
        }
        for (const std::string& path : written) {
            std::cout << "wrote " << path << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int summarize_command(const std::string& input, std::string output) {
    ReplicateCsvKind kind;
    std::vector<CalibrationRecord> calibration_records;
    std::vector<TriadRecord> triad_records;
    try {
        kind = detect_replicates_csv_kind(input);
        if (kind == ReplicateCsvKind::calibration) {
            calibration_records = read_calibration_replicates_csv(input);
            if (calibration_records.empty()) {
                throw IoError(input + ": no data rows");
            }
        } else {
            triad_records = read_triad_replicates_csv(input);
            if (triad_records.empty()) {
                throw IoError(input + ": no data rows");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (output.empty()) {
            const fs::path parent = fs::path(input).parent_path();
            const char* name = kind == ReplicateCsvKind::calibration
                                   ? "summary_calibration.csv"
                                   : "summary_triads.csv";
            output = (parent / name).string();
        }
        if (kind == ReplicateCsvKind::calibration) {
            write_summary_csv(aggregate(calibration_records), output);
        } else {
            write_summary_csv(aggregate(triad_records), output);
        }
        std::cout << "wrote " << output << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int plot_command(const std::string& input, const std::string& output_dir) {
    ReplicateCsvKind kind;
    std::vector<CalibrationRecord> calibration_records;
    std::vector<TriadRecord> triad_records;
    std::vector<double> rhos;
    std::vector<std::pair<double, double>> pairs;
    try {
        kind = detect_replicates_csv_kind(input);
        if (kind == ReplicateCsvKind::calibration) {
            calibration_records = read_calibration_replicates_csv(input);
            if (calibration_records.empty()) {
                throw IoError(input + ": no data rows");
            }
            for (const CalibrationRecord& r : calibration_records) {
                if (std::find(rhos.begin(), rhos.end(), r.rho_mw) == rhos.end()) {
                    rhos.push_back(r.rho_mw);
                }
            }
            std::sort(rhos.begin(), rhos.end());
        } else {
            triad_records = read_triad_replicates_csv(input);
            if (triad_records.empty()) {
                throw IoError(input + ": no data rows");
            }
            for (const TriadRecord& r : triad_records) {
                const std::pair<double, double> pair{r.lambda_rx, r.lambda_wx};
                if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) {
                    pairs.push_back(pair);
                }
            }
            std::sort(pairs.begin(), pairs.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        std::vector<std::string> written;
        if (kind == ReplicateCsvKind::calibration) {
            emit_calibration_figures(calibration_records, rhos, output_dir,
                                     written);
        } else {
            emit_triads_figures(triad_records, pairs, output_dir, written);
        }
        for (const std::string& path : written) {
            std::cout << "wrote " << path << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int show_defaults_command(const std::string& study) {
    try {
        std::cout << show_defaults_json(study_kind_from_string(study));
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{
        "Monte Carlo studies of dietary measurement-error correction: "
        "regression calibration against a biomarker and the method of "
        "triads"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run = app.add_subcommand(
        "run", "Simulate a study grid and write replicate + summary CSVs");
    run->add_option("--study", run_flags.study,
                    "Which study to run: calibration, triads, or density")
        ->check(CLI::IsMember({"calibration", "triads", "density"}));
    run->add_option("--config", run_flags.config_path,
                    "JSON config file overriding the default grid");
    run->add_option("--seed", run_flags.seed, "Master seed for all streams");
    run->add_option("--replicates", run_flags.replicates,
                    "Replicates per scenario cell");
    run->add_option("--out", run_flags.output_dir, "Output directory");
    run->add_flag("--emit-svg", run_flags.emit_svg,
                  "Also write SVG figures with companion CSVs");
    run->add_option("--threads", run_flags.workers,
                    "Worker threads (0 = hardware concurrency)");

    std::string summarize_input, summarize_output;
    CLI::App* summarize = app.add_subcommand(
        "summarize", "Aggregate an existing replicate CSV into a summary CSV");
    summarize->add_option("--input", summarize_input, "Replicate CSV to read")
        ->required();
    summarize->add_option("--out", summarize_output, "Summary CSV to write");

    std::string plot_input, plot_output_dir = ".";
    CLI::App* plot = app.add_subcommand(
        "plot", "Render figures from an existing replicate CSV");
    plot->add_option("--input", plot_input, "Replicate CSV to read")->required();
    plot->add_option("--out", plot_output_dir, "Output directory for figures");

    std::string defaults_study = "calibration";
    CLI::App* defaults = app.add_subcommand(
        "show-defaults", "Print the default study configuration as JSON");
    defaults->add_option("--study", defaults_study,
                         "calibration, triads, or density")
        ->check(CLI::IsMember({"calibration", "triads", "density"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (run->parsed()) return run_command(run_flags);
    if (summarize->parsed()) {
        return summarize_command(summarize_input, summarize_output);
    }
    if (plot->parsed()) return plot_command(plot_input, plot_output_dir);
    return show_defaults_command(defaults_study);
}

}  // namespace dietcalib
