#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdp/runner.hpp"

// Minimal hand-rolled SVG line charts for the trajectory file. CSVs stay the
// canonical record; this is presentation only.

namespace bdp {

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return static_cast<int>(i);
        }
        throw std::runtime_error("trajectory: missing column '" + name + "'");
    }
};

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv '" + path + "'");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::string field;
        std::stringstream ls(line);
        while (std::getline(ls, field, ',')) row.push_back(field);
        row.resize(t.columns.size());  // trailing empty field drops off the stream
        t.rows.push_back(std::move(row));
    }
    return t;
}

struct Series {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;  // (epoch, value)
};

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

void append_chart(std::string& svg, double y_offset, const std::string& title,
                  const std::vector<Series>& series, double e_min, double e_max) {
    const double w = 640, h = 170, mx = 60, my = 24;
    const double plot_w = w - 2 * mx, plot_h = h - 2 * my;

    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const auto& s : series) {
        for (const auto& [e, v] : s.points) {
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!any) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        hi += 1.0;
        lo -= (lo > 0.5 ? 0.5 : 0.0);
    }

    const auto x_of = [&](double e) {
        return e_max > e_min ? mx + (e - e_min) / (e_max - e_min) * plot_w : mx + plot_w / 2;
    };
    const auto y_of = [&](double v) { return y_offset + my + (hi - v) / (hi - lo) * plot_h; };

    svg += "<g>\n";
    svg += "<text x=\"" + fmt1(mx) + "\" y=\"" + fmt1(y_offset + 14) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + fmt1(mx) + "\" y1=\"" + fmt1(y_offset + my) + "\" x2=\"" + fmt1(mx) +
           "\" y2=\"" + fmt1(y_offset + my + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt1(mx) + "\" y1=\"" + fmt1(y_offset + my + plot_h) + "\" x2=\"" +
           fmt1(mx + plot_w) + "\" y2=\"" + fmt1(y_offset + my + plot_h) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"4\" y=\"" + fmt1(y_offset + my + 8) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt1(hi) + "</text>\n";
    svg += "<text x=\"4\" y=\"" + fmt1(y_offset + my + plot_h) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt1(lo) + "</text>\n";

    double legend_x = mx + 8;
    for (const auto& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [e, v] : s.points) svg += fmt1(x_of(e)) + "," + fmt1(y_of(v)) + " ";
        svg += "\"/>\n";
        svg += "<text x=\"" + fmt1(legend_x) + "\" y=\"" + fmt1(y_offset + my + plot_h + 16) +
               "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"" + s.color + "\">" +
               s.name + "</text>\n";
        legend_x += 110;
    }
    svg += "</g>\n";
}

}  // namespace

void emit_svg(const std::string& trajectory_csv_path, const std::string& svg_path) {
    const Table t = read_csv(trajectory_csv_path);
    if (t.rows.empty()) throw std::runtime_error("trajectory has no rows");

    const int c_epoch = t.col("epoch");
    const auto collect = [&](const std::string& name) {
        const int c = t.col(name);
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : t.rows) {
            if (row[c].empty()) continue;  // eig_max rows without a value
            pts.emplace_back(std::stod(row[c_epoch]), std::stod(row[c]));
        }
        return pts;
    };

    const double e_min = std::stod(t.rows.front()[c_epoch]);
    const double e_max = std::stod(t.rows.back()[c_epoch]);

    const double chart_h = 200;
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"" +
           std::to_string(static_cast<int>(4 * chart_h)) + "\">\n";

    append_chart(svg, 0 * chart_h, "accuracy",
                 {{"train_acc", "#1f77b4", collect("train_acc")},
                  {"val_acc", "#ff7f0e", collect("val_acc")},
                  {"test_acc", "#2ca02c", collect("test_acc")}},
                 e_min, e_max);
    append_chart(svg, 1 * chart_h, "remaining samples",
                 {{"remaining_train", "#1f77b4", collect("remaining_train")},
                  {"remaining_val", "#ff7f0e", collect("remaining_val")}},
                 e_min, e_max);
    append_chart(svg, 2 * chart_h, "balance degree",
                 {{"balance_train", "#1f77b4", collect("balance_train")},
                  {"balance_val", "#ff7f0e", collect("balance_val")}},
                 e_min, e_max);
    append_chart(svg, 3 * chart_h, "dominant eigenvalue",
                 {{"eig_max", "#d62728", collect("eig_max")}}, e_min, e_max);

    svg += "</svg>\n";

    std::ofstream out(svg_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + svg_path + "' for writing");
    out << svg;
}

}  // namespace bdp
