#include "cst/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cst/io.hpp"

namespace cst {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

std::string format_group_table(const std::vector<GroupStats>& groups, double tau) {
    std::ostringstream out;
    out << "Intervention | Percent > " << fmt(tau, "%.2g") << " | Total\n";
    out << "-------------|--------------|------\n";
    static const char* tier_names[3] = {"Tier 1: Likely Challenging Groups",
                                        "Tier 2: Borderline Groups", "Tier 3: Easy Groups"};
    int current_tier = 0;
    for (const auto& g : groups) {
        if (g.tier != current_tier) {
            current_tier = g.tier;
            out << "--- " << tier_names[current_tier - 1] << " ---\n";
        }
        out << g.key.str() << " | " << fmt(g.percent, "%.1f") << " | " << g.total << "\n";
    }
    return out.str();
}

std::string groups_to_csv(const std::vector<GroupStats>& groups) {
    std::ostringstream out;
    out << "group,tier,percent,events,total\n";
    for (const auto& g : groups)
        out << g.key.str() << "," << g.tier << "," << fmt(g.percent, "%.10g") << "," << g.events
            << "," << g.total << "\n";
    return out.str();
}

std::vector<GroupStats> groups_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("group,", 0) != 0)
        throw DataError("not a group aggregation CSV");
    std::vector<GroupStats> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw DataError("malformed group CSV row: " + line);
        GroupStats g;
        g.key = GroupKey::parse(fields[0]);
        g.tier = std::stoi(fields[1]);
        g.percent = std::stod(fields[2]);
        g.events = std::stol(fields[3]);
        g.total = std::stol(fields[4]);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<double> histogram_density(const std::vector<double>& values, int bins, double lo,
                                      double hi) {
    std::vector<double> density(bins, 0.0);
    if (values.empty()) return density;
    for (double v : values) {
        int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        b = std::clamp(b, 0, bins - 1);
        density[b] += 1.0;
    }
    for (double& d : density) d /= static_cast<double>(values.size());
    return density;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw DataError("total_variation: size mismatch");
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
    return tv / 2.0;
}

std::string histogram_csv(const std::vector<HistogramSeries>& series, int bins, double lo,
                          double hi) {
    std::ostringstream out;
    out << "bin_center";
    for (const auto& s : series) out << "," << s.name;
    out << "\n";
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        out << fmt(lo + (b + 0.5) * width, "%.10g");
        for (const auto& s : series) out << "," << fmt(s.density.at(b), "%.10g");
        out << "\n";
    }
    return out.str();
}

namespace {

constexpr int kW = 640, kH = 400;
constexpr int kMarginL = 60, kMarginR = 20, kMarginT = 40, kMarginB = 50;
const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& series_names,
                           const std::vector<std::vector<double>>& xs,
                           const std::vector<std::vector<double>>& ys, const std::string& x_label,
                           const std::string& y_label) {
    if (xs.size() != ys.size() || xs.size() != series_names.size())
        throw DataError("svg_line_chart: series shape mismatch");

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool first = true;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        for (std::size_t i = 0; i < xs[s].size(); ++i) {
            if (first) {
                x_min = x_max = xs[s][i];
                y_min = y_max = ys[s][i];
                first = false;
            }
            x_min = std::min(x_min, xs[s][i]);
            x_max = std::max(x_max, xs[s][i]);
            y_min = std::min(y_min, ys[s][i]);
            y_max = std::max(y_max, ys[s][i]);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;

    auto px = [&](double x) {
        return kMarginL + (x - x_min) / (x_max - x_min) * (kW - kMarginL - kMarginR);
    };
    auto py = [&](double y) {
        return kH - kMarginB - (y - y_min) / (y_max - y_min) * (kH - kMarginT - kMarginB);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    svg << "<line x1=\"" << kMarginL << "\" y1=\"" << kH - kMarginB << "\" x2=\"" << kW - kMarginR
        << "\" y2=\"" << kH - kMarginB << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
        << "\" y2=\"" << kH - kMarginB << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    svg << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << kH / 2 << ")\">" << y_label << "</text>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double xv = x_min + (x_max - x_min) * tick / 4.0;
        const double yv = y_min + (y_max - y_min) * tick / 4.0;
        svg << "<text x=\"" << fmt(px(xv), "%.1f") << "\" y=\"" << kH - kMarginB + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(xv, "%.4g") << "</text>\n";
        svg << "<text x=\"" << kMarginL - 6 << "\" y=\"" << fmt(py(yv) + 3, "%.1f")
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(yv, "%.4g") << "</text>\n";
    }

    for (std::size_t s = 0; s < xs.size(); ++s) {
        const char* color = kPalette[s % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs[s].size(); ++i) {
            if (i) svg << " ";
            svg << fmt(px(xs[s][i]), "%.2f") << "," << fmt(py(ys[s][i]), "%.2f");
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << kW - kMarginR - 4 << "\" y=\"" << kMarginT + 14 * (s + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">"
            << series_names[s] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string curves_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << "series,x,ap\n";
    for (const auto& p : points)
        out << p.series << "," << fmt(p.x, "%.10g") << "," << fmt(p.ap, "%.10g") << "\n";
    return out.str();
}

std::vector<CurvePoint> curves_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("series,", 0) != 0)
        throw DataError("not a curves CSV");
    std::vector<CurvePoint> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw DataError("malformed curves CSV row: " + line);
        out.push_back(CurvePoint{fields[0], std::stod(fields[1]), std::stod(fields[2])});
    }
    return out;
}

std::string curves_svg(const std::vector<CurvePoint>& points, const std::string& title,
                       const std::string& x_label) {
    if (points.empty()) throw DataError("no curve points to plot");
    std::map<std::string, std::vector<std::pair<double, double>>> by_series;
    for (const auto& p : points) by_series[p.series].push_back({p.x, p.ap});

    std::vector<std::string> names;
    std::vector<std::vector<double>> xs, ys;
    for (auto& [name, pts] : by_series) {
        std::sort(pts.begin(), pts.end());
        names.push_back(name);
        std::vector<double> x, y;
        for (const auto& [px_, py_] : pts) {
            x.push_back(px_);
            y.push_back(py_);
        }
        xs.push_back(std::move(x));
        ys.push_back(std::move(y));
    }
    return svg_line_chart(title, names, xs, ys, x_label, "AP");
}

std::string format_two_step_table(const TwoStepSummary& summary, int question, long min_count) {
    std::ostringstream out;
    out << "Question " << question << "\n";
    out << "Intervention | Percent | Total\n";
    out << "-------------|---------|------\n";
    for (const auto& p : summary.second_edits) {
        if (p.total < min_count) continue;
        out << p.second << " | " << fmt(p.percent, "%.1f") << " | " << p.total << "\n";
    }
    out << "\n(first, second) pairs\n";
    for (const auto& p : summary.pairs) {
        if (p.total < min_count) continue;
        out << "(" << p.first << ", " << p.second << ") | " << fmt(p.percent, "%.1f") << " | "
            << p.total << "\n";
    }
    return out.str();
}

}  // namespace cst
