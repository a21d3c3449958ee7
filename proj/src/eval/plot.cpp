#include "semcom/eval/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "semcom/errors.hpp"

namespace semcom::eval {

namespace {

constexpr int kWidth = 820, kHeight = 520;
constexpr int kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;

constexpr std::array<std::array<int, 3>, 12> kPalette = {{
    {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75},
    {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207}, {0, 0, 128}, {128, 64, 0},
}};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

struct Frame {
    Range xr, yr;
    double px(double x) const { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom); }
};

std::string color_hex(std::size_t i) {
    const auto& c = kPalette[i % kPalette.size()];
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

cv::Scalar color_bgr(std::size_t i) {
    const auto& c = kPalette[i % kPalette.size()];
    return {static_cast<double>(c[2]), static_cast<double>(c[1]), static_cast<double>(c[0])};
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void svg_axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
              const std::string& yl) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
       << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 5.0;
        const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 5.0;
        os << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n";
    os << "<text x=\"18\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 18 " << kHeight / 2
       << ")\" text-anchor=\"middle\">" << esc(yl) << "</text>\n";
}

void svg_legend(std::ostringstream& os, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = kTop + 10 + static_cast<int>(i) * 18;
        os << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << y - 8 << "\" width=\"10\" height=\"10\" fill=\""
           << color_hex(i) << "\"/>\n";
        os << "<text x=\"" << kWidth - kRight + 28 << "\" y=\"" << y + 1 << "\">" << esc(labels[i]) << "</text>\n";
    }
}

cv::Mat png_axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
    cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    const auto font = cv::FONT_HERSHEY_SIMPLEX;
    cv::putText(img, title, {kLeft, 24}, font, 0.55, {0, 0, 0}, 1, cv::LINE_AA);
    cv::rectangle(img, {kLeft, kTop}, {kWidth - kRight, kHeight - kBottom}, {0, 0, 0}, 1);
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 5.0;
        const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 5.0;
        cv::putText(img, num(xv), {static_cast<int>(f.px(xv)) - 10, kHeight - kBottom + 18}, font, 0.4, {0, 0, 0}, 1, cv::LINE_AA);
        cv::putText(img, num(yv), {8, static_cast<int>(f.py(yv)) + 4}, font, 0.4, {0, 0, 0}, 1, cv::LINE_AA);
    }
    cv::putText(img, xl, {(kLeft + kWidth - kRight) / 2 - 20, kHeight - 15}, font, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
    cv::putText(img, yl, {8, kTop - 8}, font, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
    return img;
}

void png_legend(cv::Mat& img, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = kTop + 10 + static_cast<int>(i) * 18;
        cv::rectangle(img, {kWidth - kRight + 12, y - 8}, {kWidth - kRight + 22, y + 2}, color_bgr(i), cv::FILLED);
        cv::putText(img, labels[i], {kWidth - kRight + 28, y + 1}, cv::FONT_HERSHEY_SIMPLEX, 0.4, {0, 0, 0}, 1, cv::LINE_AA);
    }
}

Frame frame_of(const LinePlot& p) {
    Frame f;
    for (const auto& s : p.series)
        for (const auto& [x, y] : s.points) f.xr.add(x), f.yr.add(y);
    f.xr.finish();
    f.yr.finish();
    return f;
}

Frame frame_of(const ScatterPlot& p) {
    Frame f;
    for (std::size_t i = 0; i < p.x.size(); ++i) f.xr.add(p.x[i]), f.yr.add(p.y[i]);
    f.xr.finish();
    f.yr.finish();
    return f;
}

void save_png(const std::filesystem::path& path, const cv::Mat& img) {
    if (!cv::imwrite(path.string(), img)) throw IoError("cannot write " + path.string());
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
    const auto f = frame_of(plot);
    std::ostringstream os;
    svg_axes(os, f, plot.title, plot.x_label, plot.y_label);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& s = plot.series[i];
        labels.push_back(s.label);
        os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color_hex(i) << "\" points=\"";
        for (const auto& [x, y] : s.points) os << f.px(x) << ',' << f.py(y) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : s.points)
            os << "<circle r=\"3\" fill=\"" << color_hex(i) << "\" cx=\"" << f.px(x) << "\" cy=\"" << f.py(y) << "\"/>\n";
    }
    svg_legend(os, labels);
    os << "</svg>\n";
    return os.str();
}

std::string render_svg(const ScatterPlot& plot) {
    const auto f = frame_of(plot);
    std::ostringstream os;
    svg_axes(os, f, plot.title, "", "");
    for (std::size_t i = 0; i < plot.x.size(); ++i)
        os << "<circle r=\"2.5\" fill-opacity=\"0.7\" fill=\"" << color_hex(static_cast<std::size_t>(plot.label[i]))
           << "\" cx=\"" << f.px(plot.x[i]) << "\" cy=\"" << f.py(plot.y[i]) << "\"/>\n";
    svg_legend(os, plot.labels);
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg;
}

void write_png(const std::filesystem::path& path, const LinePlot& plot) {
    const auto f = frame_of(plot);
    auto img = png_axes(f, plot.title, plot.x_label, plot.y_label);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& s = plot.series[i];
        labels.push_back(s.label);
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            cv::Point p(static_cast<int>(f.px(s.points[k].first)), static_cast<int>(f.py(s.points[k].second)));
            cv::circle(img, p, 3, color_bgr(i), cv::FILLED, cv::LINE_AA);
            if (k > 0) {
                cv::Point q(static_cast<int>(f.px(s.points[k - 1].first)), static_cast<int>(f.py(s.points[k - 1].second)));
                cv::line(img, q, p, color_bgr(i), 2, cv::LINE_AA);
            }
        }
    }
    png_legend(img, labels);
    save_png(path, img);
}

void write_png(const std::filesystem::path& path, const ScatterPlot& plot) {
    const auto f = frame_of(plot);
    auto img = png_axes(f, plot.title, "", "");
    for (std::size_t i = 0; i < plot.x.size(); ++i)
        cv::circle(img, {static_cast<int>(f.px(plot.x[i])), static_cast<int>(f.py(plot.y[i]))}, 2,
                   color_bgr(static_cast<std::size_t>(plot.label[i])), cv::FILLED, cv::LINE_AA);
    png_legend(img, plot.labels);
    save_png(path, img);
}

}  // namespace semcom::eval
