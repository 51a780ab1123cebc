#pragma once

#include <string>
#include <vector>

#include "dietcalib/calibration.hpp"
#include "dietcalib/sim_harness.hpp"

namespace dietcalib {

enum class FigureKind { ratio_box, mae_box, vc_strip, density };

// Every figure is a self-contained SVG (no external assets) plus a
// companion long-format CSV holding the exact numbers drawn, written
// atomically. `svg_path` names the SVG; the companion CSV replaces the
// extension with ".csv".

// Box-and-whisker panels of the slope ratio (or the MAE) for one rho_mw
// slice of a calibration study: one panel per lambda_wx, one box per
// alpha. Whiskers reach the most extreme points within 1.5 IQR of the
// quartiles; points beyond are drawn as outliers. The ratio figure also
// draws the equality line at 1 and the 0.95-1.05 band. Throws
// FacetMismatch when the records do not cover every (alpha, lambda_wx)
// cell for the requested rho_mw.
void emit_ratio_box(const std::vector<CalibrationRecord>& records,
                    double rho_mw, const std::string& svg_path);
void emit_mae_box(const std::vector<CalibrationRecord>& records,
                  double rho_mw, const std::string& svg_path);

// Strip plot of the replicate VC estimates for one loading pair, faceted
// by rho_rw (replicate index on x), with a dashed line at the closed-form
// true VC. Only status-ok estimates are drawn; the companion CSV lists the
// rest with their status. Throws FacetMismatch when a rho_rw facet has no
// records.
void emit_vc_strip(const std::vector<TriadRecord>& records, double lambda_rx,
                   double lambda_wx, const std::string& svg_path);

// Overlaid density curves of true and measured intake inside the
// conditioning band, with vertical lines at the band-conditional means.
void emit_density(const DensityCurves& curves, const std::string& title,
                  const std::string& svg_path);

// Just the long-format curve data (the density figure's companion CSV),
// for runs that skip SVG output.
void write_density_csv(const DensityCurves& curves, const std::string& path);

// Path of the companion CSV for a given SVG path.
std::string companion_csv_path(const std::string& svg_path);

}  // namespace dietcalib
