#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace semcom::eval {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

struct ScatterPlot {
    std::string title;
    std::vector<std::string> labels;  // legend names, indexed by point label
    std::vector<double> x, y;
    std::vector<int> label;
};

std::string render_svg(const LinePlot& plot);
std::string render_svg(const ScatterPlot& plot);

void write_svg(const std::filesystem::path& path, const std::string& svg);
void write_png(const std::filesystem::path& path, const LinePlot& plot);
void write_png(const std::filesystem::path& path, const ScatterPlot& plot);

}  // namespace semcom::eval
