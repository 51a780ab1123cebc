#include "dietcalib/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dietcalib/errors.hpp"

namespace dietcalib {
namespace {

namespace fs = std::filesystem;

std::string join_row(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += csv_escape(fields[i]);
    }
    row += '\n';
    return row;
}

// Header-indexed view of one parsed CSV file.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t column(const std::string& name, const std::string& path) const {
        const auto it = index.find(name);
        if (it == index.end()) {
            throw IoError(path + ": missing column: " + name);
        }
        return it->second;
    }
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    CsvTable table;
    std::size_t line_start = 0;
    std::size_t line_number = 0;
    while (line_start < text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        std::string line = text.substr(line_start, line_end - line_start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        line_start = line_end + 1;
        ++line_number;
        if (line.empty()) continue;

        std::vector<std::string> fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            for (std::size_t i = 0; i < table.header.size(); ++i) {
                table.index[table.header[i]] = i;
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw IoError(path + ": line " + std::to_string(line_number) +
                          ": expected " + std::to_string(table.header.size()) +
                          " fields, got " + std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw IoError(path + ": empty file");
    }
    return table;
}

double parse_real(const std::string& text, const std::string& path,
                  std::size_t row, const std::string& column) {
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return value;
    } catch (const std::exception&) {
        throw IoError(path + ": row " + std::to_string(row + 1) +
                      ": column " + column + ": not a number: '" + text + "'");
    }
}

int parse_int(const std::string& text, const std::string& path,
              std::size_t row, const std::string& column) {
    try {
        std::size_t consumed = 0;
        const int value = std::stoi(text, &consumed);
        if (consumed != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return value;
    } catch (const std::exception&) {
        throw IoError(path + ": row " + std::to_string(row + 1) +
                      ": column " + column + ": not an integer: '" + text + "'");
    }
}

}  // namespace

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string format_csv_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

void write_text_file_atomic(const std::string& path,
                            const std::string& content) {
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) {
            throw IoError(path + ": cannot create parent directory: " +
                          ec.message());
        }
    }
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(temp.string() + ": cannot open for writing");
        }
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError(temp.string() + ": write failed");
        }
    }
    fs::rename(temp, target, ec);
    if (ec) {
        throw IoError(path + ": rename failed: " + ec.message());
    }
}

void write_replicates_csv(const std::vector<CalibrationRecord>& records,
                          const std::string& path) {
    std::string out = join_row({"scenario_id", "alpha", "lambda_wx", "rho_mw",
                                "replicate", "beta0_hat", "beta1_hat",
                                "tilde_beta1", "apparent_beta1", "ratio",
                                "mae"});
    for (const CalibrationRecord& r : records) {
        out += join_row({r.scenario_id, format_csv_real(r.alpha),
                         format_csv_real(r.lambda_wx), format_csv_real(r.rho_mw),
                         std::to_string(r.replicate), format_csv_real(r.beta0_hat),
                         format_csv_real(r.beta1_hat), format_csv_real(r.tilde_beta1),
                         format_csv_real(r.apparent_beta1), format_csv_real(r.ratio),
                         format_csv_real(r.mae)});
    }
    write_text_file_atomic(path, out);
}

void write_replicates_csv(const std::vector<TriadRecord>& records,
                          const std::string& path) {
    std::string out = join_row({"scenario_id", "lambda_rx", "lambda_wx",
                                "rho_rw", "replicate", "rho_mw_hat",
                                "rho_wr_hat", "rho_mr_hat", "vc_hat", "vc_true",
                                "status"});
    for (const TriadRecord& r : records) {
        out += join_row({r.scenario_id, format_csv_real(r.lambda_rx),
                         format_csv_real(r.lambda_wx), format_csv_real(r.rho_rw),
                         std::to_string(r.replicate), format_csv_real(r.rho_mw_hat),
                         format_csv_real(r.rho_wr_hat), format_csv_real(r.rho_mr_hat),
                         format_csv_real(r.vc_hat), format_csv_real(r.vc_true),
                         to_string(r.status)});
    }
    write_text_file_atomic(path, out);
}

void write_summary_csv(const std::vector<ScenarioSummary>& summaries,
                       const std::string& path) {
    if (summaries.empty()) {
        throw std::invalid_argument("write_summary_csv: nothing to write");
    }

    // Schema comes from the first cell that has metric columns; cells
    // missing a metric (e.g. no usable replicates) print nan.
    const ScenarioSummary* schema_cell = nullptr;
    for (const ScenarioSummary& s : summaries) {
        if (!s.metrics.empty()) {
            schema_cell = &s;
            break;
        }
    }
    if (schema_cell == nullptr) {
        throw std::invalid_argument(
            "write_summary_csv: no cell carries any metric");
    }

    const char* stat_names[] = {"mean", "sd", "se", "min",
                                "q1",   "median", "q3", "max"};
    std::vector<std::string> header = {"scenario_id"};
    for (const auto& [name, value] : schema_cell->params) {
        header.push_back(name);
    }
    header.insert(header.end(),
                  {"replicates", "n_ok", "n_heywood", "n_negative",
                   "p_value_vs_truth"});
    for (const MetricSummary& m : schema_cell->metrics) {
        for (const char* stat : stat_names) {
            header.push_back(m.name + "_" + stat);
        }
    }

    std::string out = join_row(header);
    for (const ScenarioSummary& s : summaries) {
        std::vector<std::string> row = {s.scenario_id};
        for (const auto& [name, value] : s.params) {
            row.push_back(format_csv_real(value));
        }
        const int total = s.n_ok + s.n_heywood + s.n_negative;
        row.push_back(std::to_string(total));
        row.push_back(std::to_string(s.n_ok));
        row.push_back(std::to_string(s.n_heywood));
        row.push_back(std::to_string(s.n_negative));
        row.push_back(format_csv_real(s.p_value_vs_truth));
        for (const MetricSummary& schema_metric : schema_cell->metrics) {
            const MetricSummary* found = nullptr;
            for (const MetricSummary& m : s.metrics) {
                if (m.name == schema_metric.name) {
                    found = &m;
                    break;
                }
            }
            if (found == nullptr) {
                for (std::size_t k = 0; k < 8; ++k) row.push_back("nan");
                continue;
            }
            const Summary& st = found->stats;
            const double values[] = {st.mean, st.sd, st.se, st.min,
                                     st.q1,   st.median, st.q3, st.max};
            for (double v : values) row.push_back(format_csv_real(v));
        }
        out += join_row(row);
    }
    write_text_file_atomic(path, out);
}

ReplicateCsvKind detect_replicates_csv_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }
    std::string first_line;
    if (!std::getline(in, first_line)) {
        throw IoError(path + ": empty file");
    }
    if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();
    const std::vector<std::string> header = split_csv_line(first_line);
    for (const std::string& name : header) {
        if (name == "mae") return ReplicateCsvKind::calibration;
        if (name == "vc_hat") return ReplicateCsvKind::triads;
    }
    throw IoError(path + ": header matches neither replicate schema");
}

std::vector<CalibrationRecord> read_calibration_replicates_csv(
    const std::string& path) {
    const CsvTable table = read_table(path);
    const std::size_t c_id = table.column("scenario_id", path);
    const std::size_t c_alpha = table.column("alpha", path);
    const std::size_t c_lambda = table.column("lambda_wx", path);
    const std::size_t c_rho = table.column("rho_mw", path);
    const std::size_t c_rep = table.column("replicate", path);
    const std::size_t c_b0 = table.column("beta0_hat", path);
    const std::size_t c_b1 = table.column("beta1_hat", path);
    const std::size_t c_tb1 = table.column("tilde_beta1", path);
    const std::size_t c_ab1 = table.column("apparent_beta1", path);
    const std::size_t c_ratio = table.column("ratio", path);
    const std::size_t c_mae = table.column("mae", path);

    std::vector<CalibrationRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        CalibrationRecord r;
        r.scenario_id = row[c_id];
        r.alpha = parse_real(row[c_alpha], path, i, "alpha");
        r.lambda_wx = parse_real(row[c_lambda], path, i, "lambda_wx");
        r.rho_mw = parse_real(row[c_rho], path, i, "rho_mw");
        r.replicate = parse_int(row[c_rep], path, i, "replicate");
        r.beta0_hat = parse_real(row[c_b0], path, i, "beta0_hat");
        r.beta1_hat = parse_real(row[c_b1], path, i, "beta1_hat");
        r.tilde_beta1 = parse_real(row[c_tb1], path, i, "tilde_beta1");
        r.apparent_beta1 = parse_real(row[c_ab1], path, i, "apparent_beta1");
        r.ratio = parse_real(row[c_ratio], path, i, "ratio");
        r.mae = parse_real(row[c_mae], path, i, "mae");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TriadRecord> read_triad_replicates_csv(const std::string& path) {
    const CsvTable table = read_table(path);
    const std::size_t c_id = table.column("scenario_id", path);
    const std::size_t c_lrx = table.column("lambda_rx", path);
    const std::size_t c_lwx = table.column("lambda_wx", path);
    const std::size_t c_rho = table.column("rho_rw", path);
    const std::size_t c_rep = table.column("replicate", path);
    const std::size_t c_mw = table.column("rho_mw_hat", path);
    const std::size_t c_wr = table.column("rho_wr_hat", path);
    const std::size_t c_mr = table.column("rho_mr_hat", path);
    const std::size_t c_vc = table.column("vc_hat", path);
    const std::size_t c_true = table.column("vc_true", path);
    const std::size_t c_status = table.column("status", path);

    std::vector<TriadRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        TriadRecord r;
        r.scenario_id = row[c_id];
        r.lambda_rx = parse_real(row[c_lrx], path, i, "lambda_rx");
        r.lambda_wx = parse_real(row[c_lwx], path, i, "lambda_wx");
        r.rho_rw = parse_real(row[c_rho], path, i, "rho_rw");
        r.replicate = parse_int(row[c_rep], path, i, "replicate");
        r.rho_mw_hat = parse_real(row[c_mw], path, i, "rho_mw_hat");
        r.rho_wr_hat = parse_real(row[c_wr], path, i, "rho_wr_hat");
        r.rho_mr_hat = parse_real(row[c_mr], path, i, "rho_mr_hat");
        r.vc_hat = parse_real(row[c_vc], path, i, "vc_hat");
        r.vc_true = parse_real(row[c_true], path, i, "vc_true");
        try {
            r.status = triad_status_from_string(row[c_status]);
        } catch (const std::invalid_argument& e) {
            throw IoError(path + ": row " + std::to_string(i + 1) + ": " +
                          e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace dietcalib
