#pragma once

#include <string>
#include <vector>

#include "cst/engine.hpp"

namespace cst {

// Tiered intervention table (text), column layout:
//   Intervention | Percent > tau | Total
std::string format_group_table(const std::vector<GroupStats>& groups, double tau);

// CSV with columns (group, tier, percent, events, total).
std::string groups_to_csv(const std::vector<GroupStats>& groups);
std::vector<GroupStats> groups_from_csv(const std::string& csv);

struct HistogramSeries {
    std::string name;
    std::vector<double> density;  // normalized bin masses, sums to 1
};

// Equal-width histogram over [lo, hi); values outside are clamped into the
// edge bins.
std::vector<double> histogram_density(const std::vector<double>& values, int bins, double lo,
                                      double hi);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

// bin_centers column plus one column per series
std::string histogram_csv(const std::vector<HistogramSeries>& series, int bins, double lo,
                          double hi);

// Deterministic standalone SVG polyline chart.
std::string svg_line_chart(const std::string& title, const std::vector<std::string>& series_names,
                           const std::vector<std::vector<double>>& xs,
                           const std::vector<std::vector<double>>& ys,
                           const std::string& x_label, const std::string& y_label);

struct CurvePoint {
    std::string series;  // e.g. the evaluation group
    double x = 0.0;      // added scene count or capacity multiplier
    double ap = 0.0;
};

std::string curves_csv(const std::vector<CurvePoint>& points);
std::vector<CurvePoint> curves_from_csv(const std::string& csv);
std::string curves_svg(const std::vector<CurvePoint>& points, const std::string& title,
                       const std::string& x_label);

std::string format_two_step_table(const TwoStepSummary& summary, int question, long min_count);

}  // namespace cst
