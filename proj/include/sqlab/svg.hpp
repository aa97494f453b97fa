#pragma once

#include <span>
#include <string>
#include <vector>

namespace sqlab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Histogram of `values` over `bins` equal-width bins spanning [lo, hi].
/// Values outside the range land in the edge bins.
std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins, double lo, double hi);

std::string histogram(const std::string& title, std::span<const double> values, std::size_t bins, double lo,
                      double hi);

std::string line_plot(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                      const std::string& y_label, bool log_y = false);

void write_file(const std::string& path, const std::string& svg);

}  // namespace sqlab::svg
