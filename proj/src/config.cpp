#include "dietcalib/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dietcalib/errors.hpp"

namespace dietcalib {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
    throw ConfigError(path + ": " + reason);
}

double require_real(const json& value, const std::string& path) {
    if (!value.is_number()) fail(path, "expected a number");
    return value.get<double>();
}

double require_correlation(const json& value, const std::string& path) {
    const double rho = require_real(value, path);
    if (!(rho > -1.0 && rho < 1.0)) {
        fail(path, "correlation must lie strictly inside (-1, 1)");
    }
    return rho;
}

double require_positive(const json& value, const std::string& path) {
    const double v = require_real(value, path);
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
}

Eigen::Index require_size(const json& value, const std::string& path) {
    if (!value.is_number_integer()) fail(path, "expected an integer");
    const auto n = value.get<long long>();
    if (n < 1) fail(path, "must be at least 1");
    return static_cast<Eigen::Index>(n);
}

int require_count(const json& value, const std::string& path) {
    if (!value.is_number_integer()) fail(path, "expected an integer");
    const auto n = value.get<long long>();
    if (n < 1) fail(path, "must be at least 1");
    if (n > (1ll << 31)) fail(path, "unreasonably large");
    return static_cast<int>(n);
}

std::vector<double> require_array(const json& value, const std::string& path,
                                  double (*check)(const json&,
                                                  const std::string&)) {
    if (!value.is_array() || value.empty()) {
        fail(path, "expected a non-empty array");
    }
    std::vector<double> out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(check(value[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void reject_unknown_keys(const json& object, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : object.items()) {
        if (allowed.find(key) == allowed.end()) {
            fail(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

void apply_calibration_base(const json& object, CalibrationScenario& base) {
    reject_unknown_keys(object, "base",
                        {"mu_x", "sigma_x", "mu_m", "lambda_mx", "mu_w",
                         "sigma_w", "n_sub", "n_large"});
    if (object.contains("mu_x")) base.mu_x = require_real(object["mu_x"], "base.mu_x");
    if (object.contains("sigma_x")) base.sigma_x = require_positive(object["sigma_x"], "base.sigma_x");
    if (object.contains("mu_m")) base.mu_m = require_real(object["mu_m"], "base.mu_m");
    if (object.contains("lambda_mx")) base.lambda_mx = require_real(object["lambda_mx"], "base.lambda_mx");
    if (object.contains("mu_w")) base.mu_w = require_real(object["mu_w"], "base.mu_w");
    if (object.contains("sigma_w")) base.sigma_w = require_positive(object["sigma_w"], "base.sigma_w");
    if (object.contains("n_sub")) base.n_sub = require_size(object["n_sub"], "base.n_sub");
    if (object.contains("n_large")) base.n_large = require_size(object["n_large"], "base.n_large");
}

void apply_triad_base(const json& object, TriadScenario& base) {
    reject_unknown_keys(object, "base",
                        {"mu_x", "sigma_x", "mu_m", "mu_r", "mu_w", "lambda_mx",
                         "sigma_m", "sigma_r", "sigma_w", "rho_mr", "rho_mw",
                         "n"});
    if (object.contains("mu_x")) base.mu_x = require_real(object["mu_x"], "base.mu_x");
    if (object.contains("sigma_x")) base.sigma_x = require_positive(object["sigma_x"], "base.sigma_x");
    if (object.contains("mu_m")) base.mu(0) = require_real(object["mu_m"], "base.mu_m");
    if (object.contains("mu_r")) base.mu(1) = require_real(object["mu_r"], "base.mu_r");
    if (object.contains("mu_w")) base.mu(2) = require_real(object["mu_w"], "base.mu_w");
    if (object.contains("lambda_mx")) base.lambda(0) = require_real(object["lambda_mx"], "base.lambda_mx");
    if (object.contains("sigma_m")) base.sigma(0) = require_positive(object["sigma_m"], "base.sigma_m");
    if (object.contains("sigma_r")) base.sigma(1) = require_positive(object["sigma_r"], "base.sigma_r");
    if (object.contains("sigma_w")) base.sigma(2) = require_positive(object["sigma_w"], "base.sigma_w");
    if (object.contains("rho_mr")) base.rho_mr = require_correlation(object["rho_mr"], "base.rho_mr");
    if (object.contains("rho_mw")) base.rho_mw = require_correlation(object["rho_mw"], "base.rho_mw");
    if (object.contains("n")) base.n = require_size(object["n"], "base.n");
}

}  // namespace

DensityConfig default_density_config() { return DensityConfig{}; }

RunConfig default_run_config() {
    RunConfig config;
    config.calibration = default_calibration_grid();
    config.triads = default_triad_grid();
    config.density = default_density_config();
    return config;
}

StudyKind study_kind_from_string(const std::string& text) {
    if (text == "calibration") return StudyKind::calibration;
    if (text == "triads") return StudyKind::triads;
    if (text == "density") return StudyKind::density;
    throw ConfigError("study: expected calibration, triads, or density, got '" +
                      text + "'");
}

const char* to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::calibration: return "calibration";
        case StudyKind::triads: return "triads";
        case StudyKind::density: return "density";
    }
    throw std::logic_error("to_string: unknown study kind");
}

RunConfig parse_config(const std::string& json_text,
                       StudyKind fallback_study) {
    json document;
    try {
        document = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!document.is_object()) {
        fail("<document>", "expected a JSON object");
    }

    RunConfig config = default_run_config();
    config.study = fallback_study;

    reject_unknown_keys(document, "",
                        {"study", "master_seed", "output_dir", "emit_svg",
                         "replicates", "base",
                         // calibration grid
                         "alphas", "lambdas_wx", "rhos_mw",
                         // triads grid
                         "lambda_pairs", "rhos_rw",
                         // density study
                         "alpha", "lambda_wx", "n"});

    if (document.contains("study")) {
        if (!document["study"].is_string()) fail("study", "expected a string");
        config.study = study_kind_from_string(document["study"].get<std::string>());
    }
    if (document.contains("master_seed")) {
        const json& seed = document["master_seed"];
        if (!seed.is_number_integer() || seed.get<long long>() < 0) {
            fail("master_seed", "expected a non-negative integer");
        }
        config.master_seed = seed.get<std::uint64_t>();
    }
    if (document.contains("output_dir")) {
        if (!document["output_dir"].is_string()) {
            fail("output_dir", "expected a string");
        }
        config.output_dir = document["output_dir"].get<std::string>();
    }
    if (document.contains("emit_svg")) {
        if (!document["emit_svg"].is_boolean()) {
            fail("emit_svg", "expected a boolean");
        }
        config.emit_svg = document["emit_svg"].get<bool>();
    }
    if (document.contains("replicates")) {
        const int reps = require_count(document["replicates"], "replicates");
        config.calibration.replicates = reps;
        config.triads.replicates = reps;
    }

    const bool calibration_study = config.study == StudyKind::calibration;
    const bool triads_study = config.study == StudyKind::triads;
    const bool density_study = config.study == StudyKind::density;

    auto only_for = [&](const char* key, bool valid, const char* study_name) {
        if (document.contains(key) && !valid) {
            fail(key, std::string("only valid for the ") + study_name +
                          " study");
        }
    };
    only_for("alphas", calibration_study, "calibration");
    only_for("lambdas_wx", calibration_study, "calibration");
    only_for("rhos_mw", calibration_study || density_study,
             "calibration or density");
    only_for("lambda_pairs", triads_study, "triads");
    only_for("rhos_rw", triads_study, "triads");
    only_for("alpha", density_study, "density");
    only_for("lambda_wx", density_study, "density");
    only_for("n", density_study, "density");
    only_for("base", calibration_study || triads_study,
             "calibration or triads");

    if (calibration_study) {
        if (document.contains("alphas")) {
            config.calibration.alphas =
                require_array(document["alphas"], "alphas", require_positive);
        }
        if (document.contains("lambdas_wx")) {
            config.calibration.lambdas_wx = require_array(
                document["lambdas_wx"], "lambdas_wx", require_real);
            for (std::size_t i = 0; i < config.calibration.lambdas_wx.size(); ++i) {
                if (config.calibration.lambdas_wx[i] == 0.0) {
                    fail("lambdas_wx[" + std::to_string(i) + "]",
                         "loading must be non-zero");
                }
            }
        }
        if (document.contains("rhos_mw")) {
            config.calibration.rhos_mw = require_array(
                document["rhos_mw"], "rhos_mw", require_correlation);
        }
        if (document.contains("base")) {
            if (!document["base"].is_object()) fail("base", "expected an object");
            apply_calibration_base(document["base"], config.calibration.base);
        }
    } else if (triads_study) {
        if (document.contains("lambda_pairs")) {
            const json& pairs = document["lambda_pairs"];
            if (!pairs.is_array() || pairs.empty()) {
                fail("lambda_pairs", "expected a non-empty array");
            }
            config.triads.lambda_pairs.clear();
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const std::string path = "lambda_pairs[" + std::to_string(i) + "]";
                if (!pairs[i].is_array() || pairs[i].size() != 2) {
                    fail(path, "expected [lambda_rx, lambda_wx]");
                }
                const double lrx = require_real(pairs[i][0], path + "[0]");
                const double lwx = require_real(pairs[i][1], path + "[1]");
                if (lrx == 0.0 || lwx == 0.0) {
                    fail(path, "loadings must be non-zero");
                }
                config.triads.lambda_pairs.emplace_back(lrx, lwx);
            }
        }
        if (document.contains("rhos_rw")) {
            config.triads.rhos_rw = require_array(document["rhos_rw"],
                                                  "rhos_rw", require_correlation);
        }
        if (document.contains("base")) {
            if (!document["base"].is_object()) fail("base", "expected an object");
            apply_triad_base(document["base"], config.triads.base);
        }
    } else if (density_study) {
        if (document.contains("alpha")) {
            config.density.alpha = require_positive(document["alpha"], "alpha");
        }
        if (document.contains("lambda_wx")) {
            config.density.lambda_wx = require_real(document["lambda_wx"], "lambda_wx");
            if (config.density.lambda_wx == 0.0) {
                fail("lambda_wx", "loading must be non-zero");
            }
        }
        if (document.contains("rhos_mw")) {
            config.density.rhos_mw = require_array(
                document["rhos_mw"], "rhos_mw", require_correlation);
        }
        if (document.contains("n")) {
            config.density.n = require_size(document["n"], "n");
        }
    }

    return config;
}

RunConfig parse_config_file(const std::string& path,
                            StudyKind fallback_study) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str(), fallback_study);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string show_defaults_json(StudyKind study) {
    json document;
    document["study"] = to_string(study);
    document["master_seed"] = kDefaultMasterSeed;

    if (study == StudyKind::calibration) {
        const CalibrationGrid grid = default_calibration_grid();
        document["alphas"] = grid.alphas;
        document["lambdas_wx"] = grid.lambdas_wx;
        document["rhos_mw"] = grid.rhos_mw;
        document["replicates"] = grid.replicates;
        document["base"] = {
            {"mu_x", grid.base.mu_x},     {"sigma_x", grid.base.sigma_x},
            {"mu_m", grid.base.mu_m},     {"lambda_mx", grid.base.lambda_mx},
            {"mu_w", grid.base.mu_w},     {"sigma_w", grid.base.sigma_w},
            {"n_sub", grid.base.n_sub},   {"n_large", grid.base.n_large},
        };
    } else if (study == StudyKind::triads) {
        const TriadGrid grid = default_triad_grid();
        json pairs = json::array();
        for (const auto& [lrx, lwx] : grid.lambda_pairs) {
            pairs.push_back({lrx, lwx});
        }
        document["lambda_pairs"] = pairs;
        document["rhos_rw"] = grid.rhos_rw;
        document["replicates"] = grid.replicates;
        document["base"] = {
            {"mu_x", grid.base.mu_x},       {"sigma_x", grid.base.sigma_x},
            {"mu_m", grid.base.mu(0)},      {"mu_r", grid.base.mu(1)},
            {"mu_w", grid.base.mu(2)},      {"lambda_mx", grid.base.lambda(0)},
            {"sigma_m", grid.base.sigma(0)}, {"sigma_r", grid.base.sigma(1)},
            {"sigma_w", grid.base.sigma(2)}, {"rho_mr", grid.base.rho_mr},
            {"rho_mw", grid.base.rho_mw},   {"n", grid.base.n},
        };
    } else {
        const DensityConfig density = default_density_config();
        document["alpha"] = density.alpha;
        document["lambda_wx"] = density.lambda_wx;
        document["rhos_mw"] = density.rhos_mw;
        document["n"] = density.n;
    }
    return document.dump(2) + "\n";
}

}  // namespace dietcalib
