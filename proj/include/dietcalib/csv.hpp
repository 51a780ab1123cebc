#pragma once

#include <string>
#include <vector>

#include "dietcalib/sim_harness.hpp"

namespace dietcalib {

// Replicate-level CSV, one row per (scenario, replicate), sorted by
// (scenario_id, replicate). Reals are printed with 10 significant digits;
// fields are quoted per RFC 4180 when they need it. The file is written to
// a temporary sibling and renamed into place, so readers never observe a
// half-written file. Throws IoError on failure.
void write_replicates_csv(const std::vector<CalibrationRecord>& records,
                          const std::string& path);
void write_replicates_csv(const std::vector<TriadRecord>& records,
                          const std::string& path);

// Per-scenario summary CSV: one row per cell, metrics flattened into
// <metric>_<stat> columns.
void write_summary_csv(const std::vector<ScenarioSummary>& summaries,
                       const std::string& path);

// Readers for replicate CSVs produced by the writers above (or files with
// the same schema). The header row decides the study kind. Throws IoError
// naming the missing column or the malformed line.
std::vector<CalibrationRecord> read_calibration_replicates_csv(
    const std::string& path);
std::vector<TriadRecord> read_triad_replicates_csv(const std::string& path);

enum class ReplicateCsvKind { calibration, triads };

// Peeks at the header row to decide which schema the file carries.
ReplicateCsvKind detect_replicates_csv_kind(const std::string& path);

// Low-level helpers shared by writers, readers, and figure companions.
std::string csv_escape(const std::string& field);
std::vector<std::string> split_csv_line(const std::string& line);
std::string format_csv_real(double value);  // 10 significant digits
void write_text_file_atomic(const std::string& path,
                            const std::string& content);

}  // namespace dietcalib
