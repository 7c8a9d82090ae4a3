#ifndef KSTAB_SVG_HPP
#define KSTAB_SVG_HPP

#include <string>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Small static SVG charts. Output depends only on the inputs, so equal data give equal bytes.
 */

namespace kstab::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values);

/// Bar chart of bin counts for values in [lo, hi].
std::string histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values, double lo,
                      double hi, int bins);

} // namespace kstab::svg

#endif
