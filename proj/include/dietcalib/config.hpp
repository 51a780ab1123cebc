#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dietcalib/sim_harness.hpp"

namespace dietcalib {

enum class StudyKind { calibration, triads, density };

// Scenario and panel list for the conditional-density figure: one panel
// per rho_mw value, all sharing alpha and lambda_wx.
struct DensityConfig {
    double alpha = 1.0;
    double lambda_wx = 0.8;
    std::vector<double> rhos_mw = {0.0, 0.1};
    Eigen::Index n = 1000000;
};

DensityConfig default_density_config();

// Everything one `run` needs. Defaults reproduce the source study; a JSON
// config file may override any grid field.
struct RunConfig {
    StudyKind study = StudyKind::calibration;
    CalibrationGrid calibration;
    TriadGrid triads;
    DensityConfig density;
    std::uint64_t master_seed = kDefaultMasterSeed;
    std::string output_dir = ".";
    bool emit_svg = false;
};

RunConfig default_run_config();

// Parses and validates a JSON config document against the defaults.
// Unknown keys, wrong types, and out-of-range values raise ConfigError
// with the offending key path in the message. The document must be a
// single JSON object; fields absent from it keep their defaults.
// `fallback_study` stands in when the document has no "study" key (e.g. a
// --study flag given alongside a study-agnostic config file).
RunConfig parse_config(const std::string& json_text,
                       StudyKind fallback_study = StudyKind::calibration);

// File variant; IoError when the file cannot be read.
RunConfig parse_config_file(const std::string& path,
                            StudyKind fallback_study = StudyKind::calibration);

// The default config for a study serialized as a JSON document (the
// `show-defaults` output).
std::string show_defaults_json(StudyKind study);

StudyKind study_kind_from_string(const std::string& text);
const char* to_string(StudyKind kind);

}  // namespace dietcalib
