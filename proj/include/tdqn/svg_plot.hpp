#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tdqn/env.hpp"
#include "tdqn/numfmt.hpp"

namespace tdqn {

// Small static-SVG plotting kit. Output is plain text built with round-trip
// number formatting, so identical inputs give byte-identical files.
namespace svg {

struct Frame {
    double x0, y0, width, height;      // pixel box
    double xmin, xmax, ymin, ymax;     // data box

    double px(double x) const {
        if (xmax == xmin) return x0 + width / 2.0;
        return x0 + (x - xmin) / (xmax - xmin) * width;
    }
    double py(double y) const {
        if (ymax == ymin) return y0 + height / 2.0;
        return y0 + height - (y - ymin) / (ymax - ymin) * height;
    }
};

inline std::string num(double v) { return format_double(std::round(v * 100.0) / 100.0); }

inline void polyline(std::string& out, const Frame& f, const std::vector<double>& ys,
                     const char* color, double width = 1.5) {
    if (ys.empty()) return;
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"" + num(width) + "\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (i) out += ' ';
        out += num(f.px(static_cast<double>(i)));
        out += ',';
        out += num(f.py(ys[i]));
    }
    out += "\"/>\n";
}

inline void band(std::string& out, const Frame& f, const std::vector<double>& lo,
                 const std::vector<double>& hi, const char* color) {
    if (lo.empty() || lo.size() != hi.size()) return;
    out += "<path fill=\"";
    out += color;
    out += "\" fill-opacity=\"0.25\" stroke=\"none\" d=\"M";
    for (std::size_t i = 0; i < hi.size(); ++i) {
        out += num(f.px(static_cast<double>(i)));
        out += ' ';
        out += num(f.py(hi[i]));
        out += i + 1 < hi.size() ? " L" : " ";
    }
    for (std::size_t k = lo.size(); k-- > 0;) {
        out += "L";
        out += num(f.px(static_cast<double>(k)));
        out += ' ';
        out += num(f.py(lo[k]));
        out += ' ';
    }
    out += "Z\"/>\n";
}

inline void text(std::string& out, double x, double y, const std::string& s,
                 const char* anchor = "start", int size = 12, const char* color = "#333") {
    out += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
           std::to_string(size) + "\" font-family=\"sans-serif\" fill=\"";
    out += color;
    out += "\" text-anchor=\"";
    out += anchor;
    out += "\">" + s + "</text>\n";
}

inline void frame_box(std::string& out, const Frame& f, const std::string& ylab_lo,
                      const std::string& ylab_hi) {
    out += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.width) +
           "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"#999\"/>\n";
    text(out, f.x0 - 6, f.y0 + 10, ylab_hi, "end", 11, "#555");
    text(out, f.x0 - 6, f.y0 + f.height, ylab_lo, "end", 11, "#555");
}

inline std::pair<double, double> range_of(const std::vector<double>& v) {
    double lo = v.empty() ? 0.0 : v[0], hi = lo;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    return {lo, hi};
}

}  // namespace svg

// Price curve with position-change markers on top, portfolio value below;
// the layout used by the backtest command.
inline std::string plot_trajectory_svg(const Trajectory& traj, const std::string& title) {
    std::vector<double> prices, values;
    prices.reserve(traj.records.size());
    values.reserve(traj.records.size() + 1);
    values.push_back(traj.initial_value);
    for (const StepRecord& r : traj.records) {
        prices.push_back(r.price);
        values.push_back(r.value);
    }

    const double W = 920, H = 560;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::num(W) +
                      "\" height=\"" + svg::num(H) + "\" viewBox=\"0 0 " + svg::num(W) + " " +
                      svg::num(H) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg::text(out, W / 2, 22, title, "middle", 15);

    auto [plo, phi] = svg::range_of(prices);
    svg::Frame top{70, 42, W - 100, 210, 0, static_cast<double>(prices.size() ? prices.size() - 1 : 1), plo, phi};
    svg::frame_box(out, top, format_double(plo), format_double(phi));
    svg::text(out, 70, 38, "price and position changes", "start", 12, "#555");
    svg::polyline(out, top, prices, "#1f77b4");

    int prev_pos = 2;  // sentinel
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const int pos = traj.records[i].shares >= 0 ? 1 : 0;
        if (pos == prev_pos) continue;
        prev_pos = pos;
        const double x = top.px(static_cast<double>(i));
        const double y = top.py(prices[i]);
        if (pos == 1)
            out += "<path d=\"M" + svg::num(x) + " " + svg::num(y - 12) + " l5 9 h-10 Z\" fill=\"#2ca02c\"/>\n";
        else
            out += "<path d=\"M" + svg::num(x) + " " + svg::num(y + 12) + " l5 -9 h-10 Z\" fill=\"#d62728\"/>\n";
    }

    auto [vlo, vhi] = svg::range_of(values);
    svg::Frame bottom{70, 310, W - 100, 210, 0, static_cast<double>(values.size() - 1), vlo, vhi};
    svg::frame_box(out, bottom, format_double(vlo), format_double(vhi));
    svg::text(out, 70, 306, "portfolio value", "start", 12, "#555");
    svg::polyline(out, bottom, values, "#9467bd");

    if (!traj.records.empty()) {
        svg::text(out, 70, H - 10, to_string(traj.records.front().date), "start", 11, "#555");
        svg::text(out, W - 30, H - 10, to_string(traj.records.back().date), "end", 11, "#555");
    }
    out += "</svg>\n";
    return out;
}

struct ExpectedCurveView {
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

// Mean Sharpe per episode with a +-1 sd band, train and test overlaid.
inline std::string plot_expected_svg(const ExpectedCurveView& train, const ExpectedCurveView& test,
                                     const std::string& title) {
    const double W = 920, H = 420;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::num(W) +
                      "\" height=\"" + svg::num(H) + "\" viewBox=\"0 0 " + svg::num(W) + " " +
                      svg::num(H) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg::text(out, W / 2, 22, title, "middle", 15);

    std::vector<double> all;
    for (const auto* c : {&train, &test}) {
        all.insert(all.end(), c->lo.begin(), c->lo.end());
        all.insert(all.end(), c->hi.begin(), c->hi.end());
    }
    if (all.empty()) all = {0.0, 1.0};
    auto [lo, hi] = svg::range_of(all);
    const double n = static_cast<double>(std::max<std::size_t>(train.mean.size(), 2) - 1);
    svg::Frame f{70, 50, W - 100, H - 110, 0, n, lo, hi};
    svg::frame_box(out, f, format_double(lo), format_double(hi));
    svg::band(out, f, train.lo, train.hi, "#1f77b4");
    svg::band(out, f, test.lo, test.hi, "#d62728");
    svg::polyline(out, f, train.mean, "#1f77b4", 2.0);
    svg::polyline(out, f, test.mean, "#d62728", 2.0);
    svg::text(out, 74, 64, "train", "start", 12, "#1f77b4");
    svg::text(out, 74, 80, "test", "start", 12, "#d62728");
    svg::text(out, 70, H - 36, "0", "start", 11, "#555");
    svg::text(out, W - 30, H - 36, format_double(n), "end", 11, "#555");
    svg::text(out, W / 2, H - 36, "episode", "middle", 11, "#555");
    out += "</svg>\n";
    return out;
}

// Sharpe against trading-cost rate for the sweep command.
inline std::string plot_cost_sweep_svg(const std::vector<double>& costs,
                                       const std::vector<double>& sharpes,
                                       const std::string& title) {
    const double W = 640, H = 400;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::num(W) +
                      "\" height=\"" + svg::num(H) + "\" viewBox=\"0 0 " + svg::num(W) + " " +
                      svg::num(H) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg::text(out, W / 2, 22, title, "middle", 15);
    auto [ylo, yhi] = svg::range_of(sharpes);
    auto [xlo, xhi] = svg::range_of(costs);
    svg::Frame f{80, 50, W - 120, H - 120, xlo, xhi, ylo, yhi};
    svg::frame_box(out, f, format_double(ylo), format_double(yhi));
    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (i) out += ' ';
        out += svg::num(f.px(costs[i])) + "," + svg::num(f.py(sharpes[i]));
    }
    out += "\"/>\n";
    for (std::size_t i = 0; i < costs.size(); ++i)
        out += "<circle cx=\"" + svg::num(f.px(costs[i])) + "\" cy=\"" +
               svg::num(f.py(sharpes[i])) + "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    for (std::size_t i = 0; i < costs.size(); ++i)
        svg::text(out, f.px(costs[i]), H - 46, format_double(costs[i]), "middle", 11, "#555");
    svg::text(out, W / 2, H - 26, "cost rate", "middle", 11, "#555");
    out += "</svg>\n";
    return out;
}

}  // namespace tdqn
