#pragma once

#include <string>
#include <vector>

namespace lrg::cli {

struct ChartSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<ChartSeries> series;
};

/// Fixed 800x600 line chart with optional log axes, decade ticks, and a
/// legend; rendered without external dependencies. Output bytes depend
/// only on the input data.
std::string render_chart(const ChartSpec& spec);

/// Stable series color per projection-law label.
std::string law_color(const std::string& law_name);

}  // namespace lrg::cli
