#include "dietcalib/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "dietcalib/csv.hpp"
#include "dietcalib/errors.hpp"
#include "dietcalib/stats.hpp"

namespace dietcalib {
namespace {

// ---------------------------------------------------------------------
// Small SVG toolkit. Coordinates are emitted with two decimals so the
// same records always produce the same bytes.
// ---------------------------------------------------------------------

std::string px(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

std::string tick_label(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%g", v);
    return buffer;
}

struct Svg {
    std::string body;
    double width = 0.0;
    double height = 0.0;

    Svg(double w, double h) : width(w), height(h) {}

    void line(double x1, double y1, double x2, double y2,
              const std::string& stroke, double stroke_width = 1.0,
              bool dashed = false) {
        body += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" +
                px(x2) + "\" y2=\"" + px(y2) + "\" stroke=\"" + stroke +
                "\" stroke-width=\"" + px(stroke_width) + "\"";
        if (dashed) body += " stroke-dasharray=\"5,4\"";
        body += "/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke, const std::string& klass = "") {
        body += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" +
                px(w) + "\" height=\"" + px(h) + "\" fill=\"" + fill +
                "\" stroke=\"" + stroke + "\"";
        if (!klass.empty()) body += " class=\"" + klass + "\"";
        body += "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill,
                double opacity = 1.0) {
        body += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" +
                px(r) + "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body += " fill-opacity=\"" + px(opacity) + "\"";
        body += "/>\n";
    }

    void text(double x, double y, const std::string& content,
              const std::string& anchor = "middle", double size = 12.0,
              const std::string& fill = "#333333") {
        body += "<text x=\"" + px(x) + "\" y=\"" + px(y) +
                "\" text-anchor=\"" + anchor + "\" font-family=\"sans-serif\"" +
                " font-size=\"" + px(size) + "\" fill=\"" + fill + "\">" +
                content + "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& points,
                  const std::string& stroke, double stroke_width,
                  bool dashed = false) {
        body += "<polyline fill=\"none\" stroke=\"" + stroke +
                "\" stroke-width=\"" + px(stroke_width) + "\"";
        if (dashed) body += " stroke-dasharray=\"6,4\"";
        body += " points=\"";
        for (const auto& [x, y] : points) {
            body += px(x) + "," + px(y) + " ";
        }
        body += "\"/>\n";
    }

    std::string finish() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
               px(width) + "\" height=\"" + px(height) + "\" viewBox=\"0 0 " +
               px(width) + " " + px(height) + "\">\n" +
               "<rect x=\"0\" y=\"0\" width=\"" + px(width) + "\" height=\"" +
               px(height) + "\" fill=\"#ffffff\"/>\n" + body + "</svg>\n";
    }
};

struct LinearScale {
    double d0 = 0.0, d1 = 1.0;  // data range
    double p0 = 0.0, p1 = 1.0;  // pixel range

    double operator()(double v) const {
        return p0 + (v - d0) / (d1 - d0) * (p1 - p0);
    }
};

// Round step sizes of 1/2/5 x 10^k, covering [lo, hi] with ~n ticks.
std::vector<double> nice_ticks(double lo, double hi, int n = 5) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / std::max(1, n);
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double step = magnitude;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (magnitude * mult >= raw) {
            step = magnitude * mult;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9;
         t += step) {
        // Snap near-zero ticks produced by accumulation error.
        ticks.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

struct BoxStats {
    double whisker_lo = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_hi = 0.0;
    std::vector<double> outliers;
};

// Tukey box: whiskers reach the most extreme observations within 1.5 IQR
// of the quartiles; everything beyond is an outlier.
BoxStats box_stats(const std::vector<double>& values) {
    const Eigen::Map<const Eigen::VectorXd> view(
        values.data(), static_cast<Eigen::Index>(values.size()));
    BoxStats b;
    b.q1 = quantile(view, 0.25);
    b.median = quantile(view, 0.5);
    b.q3 = quantile(view, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q3;
    b.whisker_hi = b.q1;
    bool any_in = false;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            if (!any_in) {
                b.whisker_lo = v;
                b.whisker_hi = v;
                any_in = true;
            } else {
                b.whisker_lo = std::min(b.whisker_lo, v);
                b.whisker_hi = std::max(b.whisker_hi, v);
            }
        }
    }
    if (!any_in) {
        // Degenerate: everything flagged; collapse the whiskers onto the box.
        b.whisker_lo = b.q1;
        b.whisker_hi = b.q3;
    }
    std::sort(b.outliers.begin(), b.outliers.end());
    return b;
}

const char* kBoxFill = "#9ecae1";
const char* kBoxStroke = "#2c5985";
const char* kOutlier = "#666666";
const char* kReference = "#c44e52";
const char* kPoint = "#4c72b0";

// Shared implementation of the two metric box figures. The records are one
// rho_mw slice of a calibration study; panels are lambda_wx values, boxes
// are alphas.
void emit_metric_box(const std::vector<CalibrationRecord>& records,
                     double rho_mw, double CalibrationRecord::*metric,
                     const std::string& metric_name, bool draw_unity_band,
                     const std::string& svg_path) {
    std::vector<const CalibrationRecord*> slice;
    for (const CalibrationRecord& r : records) {
        if (r.rho_mw == rho_mw) slice.push_back(&r);
    }
    if (slice.empty()) {
        throw FacetMismatch("no records for rho_mw = " + format_double(rho_mw));
    }

    std::set<double> alpha_set, lambda_set;
    for (const CalibrationRecord* r : slice) {
        alpha_set.insert(r->alpha);
        lambda_set.insert(r->lambda_wx);
    }
    const std::vector<double> alphas(alpha_set.begin(), alpha_set.end());
    const std::vector<double> lambdas(lambda_set.begin(), lambda_set.end());

    // One column of values per (lambda panel, alpha box).
    std::vector<std::vector<std::vector<double>>> cells(
        lambdas.size(), std::vector<std::vector<double>>(alphas.size()));
    for (const CalibrationRecord* r : slice) {
        const auto li = static_cast<std::size_t>(
            std::find(lambdas.begin(), lambdas.end(), r->lambda_wx) -
            lambdas.begin());
        const auto ai = static_cast<std::size_t>(
            std::find(alphas.begin(), alphas.end(), r->alpha) - alphas.begin());
        cells[li][ai].push_back(r->*metric);
    }
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            if (cells[li][ai].empty()) {
                throw FacetMismatch(
                    "no records for lambda_wx = " + format_double(lambdas[li]) +
                    ", alpha = " + format_double(alphas[ai]) + " at rho_mw = " +
                    format_double(rho_mw));
            }
        }
    }

    std::vector<std::vector<BoxStats>> stats(lambdas.size());
    double value_lo = std::numeric_limits<double>::infinity();
    double value_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            BoxStats b = box_stats(cells[li][ai]);
            value_lo = std::min({value_lo, b.whisker_lo,
                                 b.outliers.empty() ? b.whisker_lo
                                                    : b.outliers.front()});
            value_hi = std::max({value_hi, b.whisker_hi,
                                 b.outliers.empty() ? b.whisker_hi
                                                    : b.outliers.back()});
            stats[li].push_back(std::move(b));
        }
    }
    if (draw_unity_band) {
        value_lo = std::min(value_lo, 0.95);
        value_hi = std::max(value_hi, 1.05);
    }
    const double pad = 0.05 * (value_hi - value_lo + 1e-12);
    value_lo -= pad;
    value_hi += pad;

    // Layout: shared y axis, one panel per lambda.
    const double width = 960.0, height = 380.0;
    const double margin_left = 64.0, margin_right = 16.0;
    const double margin_top = 48.0, margin_bottom = 56.0;
    const double panel_gap = 14.0;
    const double panel_width =
        (width - margin_left - margin_right -
         panel_gap * (static_cast<double>(lambdas.size()) - 1.0)) /
        static_cast<double>(lambdas.size());

    Svg svg(width, height);
    svg.text(width / 2.0, 24.0,
             metric_name + " by alpha and lambda_wx, rho_mw = " +
                 format_double(rho_mw),
             "middle", 15.0);

    const LinearScale y{value_lo, value_hi, height - margin_bottom, margin_top};
    for (double t : nice_ticks(value_lo, value_hi, 6)) {
        svg.line(margin_left - 4.0, y(t), width - margin_right, y(t),
                 "#dddddd", 0.75);
        svg.text(margin_left - 8.0, y(t) + 4.0, tick_label(t), "end", 11.0);
    }
    svg.text(14.0, margin_top - 14.0, metric_name, "start", 12.0);

    std::string csv =
        "figure,rho_mw,lambda_wx,alpha,element,value\n";
    auto csv_row = [&](double lambda, double alpha, const std::string& element,
                       double value) {
        csv += metric_name + "_box," + format_csv_real(rho_mw) + "," +
               format_csv_real(lambda) + "," + format_csv_real(alpha) + "," +
               element + "," + format_csv_real(value) + "\n";
    };

    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const double panel_x0 =
            margin_left + static_cast<double>(li) * (panel_width + panel_gap);
        svg.rect(panel_x0, margin_top, panel_width,
                 height - margin_top - margin_bottom, "none", "#999999");
        svg.text(panel_x0 + panel_width / 2.0, margin_top - 6.0,
                 "lambda_wx = " + format_double(lambdas[li]), "middle", 12.0);

        if (draw_unity_band) {
            svg.rect(panel_x0, y(1.05), panel_width, y(0.95) - y(1.05),
                     "#f2e6c9", "none");
            svg.line(panel_x0, y(1.0), panel_x0 + panel_width, y(1.0),
                     kReference, 1.0, true);
        }

        const double slot = panel_width / static_cast<double>(alphas.size());
        const double box_width = slot * 0.5;
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            const BoxStats& b = stats[li][ai];
            const double cx = panel_x0 + slot * (static_cast<double>(ai) + 0.5);

            svg.line(cx, y(b.whisker_lo), cx, y(b.q1), kBoxStroke, 1.0);
            svg.line(cx, y(b.q3), cx, y(b.whisker_hi), kBoxStroke, 1.0);
            svg.line(cx - box_width / 4.0, y(b.whisker_lo), cx + box_width / 4.0,
                     y(b.whisker_lo), kBoxStroke, 1.0);
            svg.line(cx - box_width / 4.0, y(b.whisker_hi), cx + box_width / 4.0,
                     y(b.whisker_hi), kBoxStroke, 1.0);
            svg.rect(cx - box_width / 2.0, y(b.q3), box_width,
                     y(b.q1) - y(b.q3), kBoxFill, kBoxStroke, "box");
            svg.line(cx - box_width / 2.0, y(b.median), cx + box_width / 2.0,
                     y(b.median), kBoxStroke, 1.75);
            for (double v : b.outliers) {
                svg.circle(cx, y(v), 2.0, kOutlier, 0.6);
            }
            svg.text(cx, height - margin_bottom + 16.0,
                     format_double(alphas[ai]), "middle", 11.0);

            csv_row(lambdas[li], alphas[ai], "whisker_lo", b.whisker_lo);
            csv_row(lambdas[li], alphas[ai], "q1", b.q1);
            csv_row(lambdas[li], alphas[ai], "median", b.median);
            csv_row(lambdas[li], alphas[ai], "q3", b.q3);
            csv_row(lambdas[li], alphas[ai], "whisker_hi", b.whisker_hi);
            for (double v : b.outliers) csv_row(lambdas[li], alphas[ai], "outlier", v);
        }
        svg.text(panel_x0 + panel_width / 2.0, height - margin_bottom + 34.0,
                 "alpha", "middle", 12.0);
    }

    write_text_file_atomic(svg_path, svg.finish());
    write_text_file_atomic(companion_csv_path(svg_path), csv);
}

}  // namespace

std::string companion_csv_path(const std::string& svg_path) {
    if (svg_path.size() >= 4 &&
        svg_path.compare(svg_path.size() - 4, 4, ".svg") == 0) {
        return svg_path.substr(0, svg_path.size() - 4) + ".csv";
    }
    return svg_path + ".csv";
}

void emit_ratio_box(const std::vector<CalibrationRecord>& records,
                    double rho_mw, const std::string& svg_path) {
    emit_metric_box(records, rho_mw, &CalibrationRecord::ratio, "ratio", true,
                    svg_path);
}

void emit_mae_box(const std::vector<CalibrationRecord>& records, double rho_mw,
                  const std::string& svg_path) {
    emit_metric_box(records, rho_mw, &CalibrationRecord::mae, "mae", false,
                    svg_path);
}

void emit_vc_strip(const std::vector<TriadRecord>& records, double lambda_rx,
                   double lambda_wx, const std::string& svg_path) {
    std::vector<const TriadRecord*> slice;
    for (const TriadRecord& r : records) {
        if (r.lambda_rx == lambda_rx && r.lambda_wx == lambda_wx) {
            slice.push_back(&r);
        }
    }
    if (slice.empty()) {
        throw FacetMismatch("no records for lambda pair (" +
                            format_double(lambda_rx) + ", " +
                            format_double(lambda_wx) + ")");
    }

    std::set<double> rho_set;
    for (const TriadRecord* r : slice) rho_set.insert(r->rho_rw);
    const std::vector<double> rhos(rho_set.begin(), rho_set.end());

    std::vector<std::vector<const TriadRecord*>> facets(rhos.size());
    for (const TriadRecord* r : slice) {
        const auto fi = static_cast<std::size_t>(
            std::find(rhos.begin(), rhos.end(), r->rho_rw) - rhos.begin());
        facets[fi].push_back(r);
    }

    const double vc_true = slice.front()->vc_true;
    double value_lo = vc_true, value_hi = vc_true;
    int max_replicate = 0;
    bool any_ok = false;
    for (const TriadRecord* r : slice) {
        max_replicate = std::max(max_replicate, r->replicate);
        if (r->status == TriadStatus::ok) {
            any_ok = true;
            value_lo = std::min(value_lo, r->vc_hat);
            value_hi = std::max(value_hi, r->vc_hat);
        }
    }
    if (!any_ok) {
        throw FacetMismatch("no usable estimates for lambda pair (" +
                            format_double(lambda_rx) + ", " +
                            format_double(lambda_wx) + ")");
    }
    const double pad = 0.06 * (value_hi - value_lo + 1e-12);
    value_lo -= pad;
    value_hi += pad;

    const double width = 960.0;
    const double margin_left = 64.0, margin_right = 110.0;
    const double margin_top = 48.0, margin_bottom = 48.0;
    const double panel_height = 110.0, panel_gap = 12.0;
    const double height =
        margin_top + margin_bottom +
        panel_height * static_cast<double>(rhos.size()) +
        panel_gap * (static_cast<double>(rhos.size()) - 1.0);

    Svg svg(width, height);
    svg.text(width / 2.0, 24.0,
             "validity coefficient estimates, lambda = (" +
                 format_double(lambda_rx) + ", " + format_double(lambda_wx) +
                 ")",
             "middle", 15.0);
    svg.text(14.0, margin_top - 14.0, "vc_hat", "start", 12.0);

    std::string csv = "figure,lambda_rx,lambda_wx,rho_rw,element,replicate,value\n";
    auto csv_row = [&](double rho, const std::string& element, int replicate,
                       double value) {
        csv += "vc_strip," + format_csv_real(lambda_rx) + "," +
               format_csv_real(lambda_wx) + "," + format_csv_real(rho) + "," +
               element + "," +
               (replicate < 0 ? std::string("") : std::to_string(replicate)) +
               "," + format_csv_real(value) + "\n";
    };

    const LinearScale x{0.0, static_cast<double>(std::max(max_replicate, 1)),
                        margin_left + 6.0, width - margin_right - 6.0};
    for (std::size_t fi = 0; fi < rhos.size(); ++fi) {
        const double panel_y0 =
            margin_top + static_cast<double>(fi) * (panel_height + panel_gap);
        const LinearScale y{value_lo, value_hi, panel_y0 + panel_height,
                            panel_y0};

        svg.rect(margin_left, panel_y0, width - margin_left - margin_right,
                 panel_height, "none", "#999999");
        svg.text(width - margin_right + 8.0, panel_y0 + panel_height / 2.0,
                 "rho_rw = " + format_double(rhos[fi]), "start", 12.0);
        for (double t : nice_ticks(value_lo, value_hi, 3)) {
            svg.text(margin_left - 8.0, y(t) + 4.0, tick_label(t), "end", 10.0);
            svg.line(margin_left - 4.0, y(t), margin_left, y(t), "#333333",
                     1.0);
        }

        for (const TriadRecord* r : facets[fi]) {
            if (r->status == TriadStatus::ok) {
                svg.circle(x(r->replicate), y(r->vc_hat), 1.8, kPoint, 0.8);
            }
            csv_row(rhos[fi],
                    r->status == TriadStatus::ok
                        ? "estimate"
                        : std::string("estimate_") + to_string(r->status),
                    r->replicate, r->vc_hat);
        }
        svg.line(margin_left, y(vc_true), width - margin_right, y(vc_true),
                 kReference, 1.25, true);
        csv_row(rhos[fi], "true_vc", -1, vc_true);
    }
    svg.text((margin_left + width - margin_right) / 2.0, height - 14.0,
             "replicate", "middle", 12.0);

    write_text_file_atomic(svg_path, svg.finish());
    write_text_file_atomic(companion_csv_path(svg_path), csv);
}

void emit_density(const DensityCurves& curves, const std::string& title,
                  const std::string& svg_path) {
    if (curves.grid.size() == 0 ||
        curves.grid.size() != curves.density_x.size() ||
        curves.grid.size() != curves.density_m.size()) {
        throw std::invalid_argument("emit_density: malformed curves");
    }

    const double width = 720.0, height = 420.0;
    const double margin_left = 64.0, margin_right = 20.0;
    const double margin_top = 48.0, margin_bottom = 52.0;

    const double grid_lo = curves.grid(0);
    const double grid_hi = curves.grid(curves.grid.size() - 1);
    const double density_hi =
        1.05 * std::max(curves.density_x.maxCoeff(), curves.density_m.maxCoeff());

    const LinearScale x{grid_lo, grid_hi, margin_left, width - margin_right};
    const LinearScale y{0.0, density_hi, height - margin_bottom, margin_top};

    Svg svg(width, height);
    svg.text(width / 2.0, 24.0, title, "middle", 15.0);
    svg.rect(margin_left, margin_top, width - margin_left - margin_right,
             height - margin_top - margin_bottom, "none", "#999999");
    for (double t : nice_ticks(grid_lo, grid_hi, 7)) {
        svg.text(x(t), height - margin_bottom + 16.0, tick_label(t), "middle",
                 11.0);
        svg.line(x(t), height - margin_bottom, x(t),
                 height - margin_bottom + 4.0, "#333333", 1.0);
    }
    for (double t : nice_ticks(0.0, density_hi, 5)) {
        svg.text(margin_left - 8.0, y(t) + 4.0, tick_label(t), "end", 11.0);
        svg.line(margin_left - 4.0, y(t), margin_left, y(t), "#333333", 1.0);
    }
    svg.text(14.0, margin_top - 14.0, "density", "start", 12.0);
    svg.text((margin_left + width - margin_right) / 2.0, height - 14.0,
             "log intake", "middle", 12.0);

    std::vector<std::pair<double, double>> pts_x, pts_m;
    pts_x.reserve(static_cast<std::size_t>(curves.grid.size()));
    pts_m.reserve(static_cast<std::size_t>(curves.grid.size()));
    for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
        pts_x.emplace_back(x(curves.grid(i)), y(curves.density_x(i)));
        pts_m.emplace_back(x(curves.grid(i)), y(curves.density_m(i)));
    }
    svg.polyline(pts_x, "#c44e52", 1.75, false);
    svg.polyline(pts_m, "#4c72b0", 1.75, true);

    svg.line(x(curves.mean_x), y(0.0), x(curves.mean_x), margin_top, "#c44e52",
             1.0);
    svg.line(x(curves.mean_m), y(0.0), x(curves.mean_m), margin_top, "#4c72b0",
             1.0);

    svg.text(width - margin_right - 8.0, margin_top + 18.0,
             "true intake | w band", "end", 12.0, "#c44e52");
    svg.text(width - margin_right - 8.0, margin_top + 34.0,
             "measured intake | w band", "end", 12.0, "#4c72b0");

    write_text_file_atomic(svg_path, svg.finish());
    write_density_csv(curves, companion_csv_path(svg_path));
}

void write_density_csv(const DensityCurves& curves, const std::string& path) {
    std::string csv = "series,grid,density\n";
    for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
        csv += "x," + format_csv_real(curves.grid(i)) + "," +
               format_csv_real(curves.density_x(i)) + "\n";
    }
    for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
        csv += "m," + format_csv_real(curves.grid(i)) + "," +
               format_csv_real(curves.density_m(i)) + "\n";
    }
    csv += "x_mean," + format_csv_real(curves.mean_x) + ",\n";
    csv += "m_mean," + format_csv_real(curves.mean_m) + ",\n";
    csv += "band_lo," + format_csv_real(curves.band_lo) + ",\n";
    csv += "band_hi," + format_csv_real(curves.band_hi) + ",\n";
    csv += "n_band," + std::to_string(curves.n_band) + ",\n";
    write_text_file_atomic(path, csv);
}

}  // namespace dietcalib
