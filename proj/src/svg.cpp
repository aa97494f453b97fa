#include "sqlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sqlab::svg {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
}

void axes(std::ostringstream& os, double x0, double x1, double y0, double y1, const std::string& xl,
          const std::string& yl, bool log_y) {
    const double bx = kLeft, by = kHeight - kBottom, tx = kWidth - kRight, ty = kTop;
    os << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << tx << "\" y2=\"" << by << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << ty << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double x = bx + f * (tx - bx);
        const double y = by - f * (by - ty);
        const double yv = log_y ? std::pow(10.0, y0 + f * (y1 - y0)) : y0 + f * (y1 - y0);
        os << "<text x=\"" << px(x) << "\" y=\"" << by + 16 << "\" text-anchor=\"middle\">" << num(x0 + f * (x1 - x0))
           << "</text>\n";
        os << "<text x=\"" << bx - 6 << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    os << "<text x=\"" << (bx + tx) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(xl)
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (by + ty) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (by + ty) / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    if (!(hi > lo)) throw std::invalid_argument("histogram range is empty");
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    return counts;
}

std::string histogram(const std::string& title, std::span<const double> values, std::size_t bins, double lo,
                      double hi) {
    const auto counts = histogram_counts(values, bins, lo, hi);
    const double top = std::max<double>(1.0, static_cast<double>(*std::max_element(counts.begin(), counts.end())));
    std::ostringstream os;
    header(os, title);
    axes(os, lo, hi, 0.0, top, "value", "count", false);
    const double bx = kLeft, by = kHeight - kBottom, w = kWidth - kRight - kLeft, h = by - kTop;
    const double bw = w / static_cast<double>(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        if (counts[i] == 0) continue;
        const double bh = h * static_cast<double>(counts[i]) / top;
        os << "<rect x=\"" << px(bx + bw * static_cast<double>(i)) << "\" y=\"" << px(by - bh) << "\" width=\""
           << px(std::max(bw - 1.0, 1.0)) << "\" height=\"" << px(bh) << "\" fill=\"" << kColors[0] << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string line_plot(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                      const std::string& y_label, bool log_y) {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series x and y differ in length");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = ty(s.y[i]);
            if (first) {
                x0 = x1 = s.x[i];
                y0 = y1 = y;
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    std::ostringstream os;
    header(os, title);
    axes(os, x0, x1, y0, y1, x_label, y_label, log_y);
    const double bx = kLeft, by = kHeight - kBottom, w = kWidth - kRight - kLeft, h = by - kTop;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << px(bx + w * (s.x[i] - x0) / (x1 - x0)) << ',' << px(by - h * (ty(s.y[i]) - y0) / (y1 - y0)) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << bx + 10 << "\" y=\"" << kTop + 14 * (k + 1) << "\" fill=\"" << color << "\">"
           << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << svg;
    if (!out) throw std::ios_base::failure("write failed for " + path);
}

}  // namespace sqlab::svg
