#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lrg::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double unit(double v) const {
        const double a = log ? std::log10(v) : v;
        const double l = log ? std::log10(lo) : lo;
        const double h = log ? std::log10(hi) : hi;
        if (h <= l) return 0.5;
        return (a - l) / (h - l);
    }
};

std::vector<double> decade_ticks(double lo, double hi) {
    std::vector<double> ticks;
    const int first = static_cast<int>(std::floor(std::log10(lo)));
    const int last = static_cast<int>(std::ceil(std::log10(hi)));
    for (int e = first; e <= last; ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo / 1.001 && v <= hi * 1.001) ticks.push_back(v);
    }
    return ticks;
}

std::vector<double> linear_ticks(double lo, double hi) {
    std::vector<double> ticks;
    const double span = hi - lo;
    if (span <= 0) return {lo};
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double mult : {1.0, 2.0, 5.0, 10.0})
        if (mag * mult >= raw) { step = mag * mult; break; }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
        ticks.push_back(v);
    return ticks;
}

}  // namespace

std::string law_color(const std::string& law_name) {
    if (law_name == "gaussian") return "#d62728";
    if (law_name == "haar-stiefel") return "#1f77b4";
    if (law_name == "coordinate-axis") return "#2ca02c";
    if (law_name == "instance-dependent") return "#9467bd";
    return "#7f7f7f";
}

std::string render_chart(const ChartSpec& spec) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = 0.0;
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = 0.0;
    bool any = false;
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x && x <= 0.0) continue;
            if (spec.log_y && y <= 0.0) continue;
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
            any = true;
        }
    }
    if (!any) {
        x_lo = spec.log_x ? 1.0 : 0.0;
        x_hi = spec.log_x ? 10.0 : 1.0;
        y_lo = spec.log_y ? 1.0 : 0.0;
        y_hi = spec.log_y ? 10.0 : 1.0;
    }
    if (x_lo == x_hi) x_hi = spec.log_x ? x_lo * 10.0 : x_lo + 1.0;
    if (y_lo == y_hi) y_hi = spec.log_y ? y_lo * 10.0 : y_lo + 1.0;

    const AxisScale xs{x_lo, x_hi, spec.log_x};
    const AxisScale ys{y_lo, y_hi, spec.log_y};
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto px = [&](double v) { return kMarginLeft + xs.unit(v) * plot_w; };
    const auto py = [&](double v) {
        return kHeight - kMarginBottom - ys.unit(v) * plot_h;
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(kMarginLeft + plot_w / 2) << "\" y=\"24\" "
           "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << spec.title << "</text>\n";

    // Frame.
    out << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop)
        << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    const std::vector<double> xticks =
        spec.log_x ? decade_ticks(x_lo, x_hi) : linear_ticks(x_lo, x_hi);
    for (const double t : xticks) {
        const double x = px(t);
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kMarginTop)
            << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(kHeight - kMarginBottom)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kHeight - kMarginBottom + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(t) << "</text>\n";
    }
    const std::vector<double> yticks =
        spec.log_y ? decade_ticks(y_lo, y_hi) : linear_ticks(y_lo, y_hi);
    for (const double t : yticks) {
        const double y = py(t);
        out << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(y)
            << "\" x2=\"" << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(y)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fmt(kMarginLeft - 6) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(t) << "</text>\n";
    }

    out << "<text x=\"" << fmt(kMarginLeft + plot_w / 2) << "\" y=\""
        << fmt(kHeight - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << fmt(kMarginTop + plot_h / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 "
        << fmt(kMarginTop + plot_h / 2) << ")\">" << spec.y_label << "</text>\n";

    for (const auto& s : spec.series) {
        std::ostringstream points;
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x && x <= 0.0) continue;
            if (spec.log_y && y <= 0.0) continue;
            if (!first) points << " ";
            points << fmt(px(x)) << "," << fmt(py(y));
            first = false;
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
    }

    // Legend.
    double ly = kMarginTop + 10;
    const double lx = kWidth - kMarginRight + 12;
    for (const auto& s : spec.series) {
        out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(lx + 22) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
            << "</text>\n";
        ly += 20;
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace lrg::cli
