#include "kstab/svg.hpp"

#include "kstab/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kstab::svg {

namespace {

constexpr double width = 640;
constexpr double height = 400;
constexpr double left = 70;
constexpr double right = 150;
constexpr double top = 40;
constexpr double bottom = 50;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.5;
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

std::string header(const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " +
           num(width) + " " + num(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(title) + "</text>\n";
}

std::string axes(Range xr, Range yr, const std::string& x_label, const std::string& y_label, bool x_ticks) {
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    std::string out = "<g stroke=\"black\" stroke-width=\"1\">\n<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
                      "\" y2=\"" + num(y0) + "\"/>\n<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
                      "\" y2=\"" + num(y1) + "\"/>\n</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int t = 0; t <= 4; ++t) {
        const double f = t / 4.0;
        const double yv = yr.lo + f * (yr.hi - yr.lo);
        const double py = y0 - f * (y0 - y1);
        out += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + tick(yv) + "</text>\n";
        if (x_ticks) {
            const double xv = xr.lo + f * (xr.hi - xr.lo);
            const double px = x0 + f * (x1 - x0);
            out += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" + tick(xv) + "</text>\n";
        }
    }
    out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(height - 12) + "\" text-anchor=\"middle\">" + escape(x_label) +
           "</text>\n";
    out += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n</g>\n";
    return out;
}

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw InvalidArgument("series '" + s.name + "' has mismatched x and y lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    }
    if (!std::isfinite(xlo) || !std::isfinite(ylo)) {
        throw InvalidArgument("line chart needs at least one point");
    }
    const Range xr = padded(xlo, xhi);
    const Range yr = padded(std::min(0.0, ylo), yhi);
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

    std::string out = header(title) + axes(xr, yr, x_label, y_label, true);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % std::size(palette)];
        std::string pts;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            pts += (i ? " " : "") + num(px(series[s].x[i])) + "," + num(py(series[s].y[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            out += "<circle cx=\"" + num(px(series[s].x[i])) + "\" cy=\"" + num(py(series[s].y[i])) + "\" r=\"3\" fill=\"" + color +
                   "\"/>\n";
        }
        const double ly = top + 16 + 18 * static_cast<double>(s);
        out += "<rect x=\"" + num(width - right + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" + color +
               "\"/>\n<text x=\"" + num(width - right + 30) + "\" y=\"" + num(ly + 1) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].name) + "</text>\n";
    }
    return out + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
    if (labels.size() != values.size() || values.empty()) {
        throw InvalidArgument("bar chart needs one label per value and at least one value");
    }
    const double ymax = *std::max_element(values.begin(), values.end());
    const Range yr = padded(0.0, std::max(ymax, 0.0));
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    const double slot = (x1 - x0) / static_cast<double>(values.size());
    std::string out = header(title) + axes({0, 1}, yr, "", y_label, false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double h = (std::max(values[i], 0.0) - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
        const double bx = x0 + slot * static_cast<double>(i) + slot * 0.15;
        out += "<rect x=\"" + num(bx) + "\" y=\"" + num(y0 - h) + "\" width=\"" + num(slot * 0.7) + "\" height=\"" + num(h) +
               "\" fill=\"" + palette[0] + "\"/>\n";
        out += "<text x=\"" + num(bx + slot * 0.35) + "\" y=\"" + num(y0 + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + escape(labels[i]) + "</text>\n";
    }
    return out + "</svg>\n";
}

std::string histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values, double lo,
                      double hi, int bins) {
    if (bins < 1 || !(hi > lo)) {
        throw InvalidArgument("histogram needs bins >= 1 and hi > lo");
    }
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        counts[std::clamp(b, 0, bins - 1)] += 1;
    }
    std::vector<std::string> labels;
    for (int b = 0; b < bins; ++b) {
        labels.push_back(tick(lo + (hi - lo) * b / bins));
    }
    return bar_chart(title + " (" + x_label + ")", "count", labels, counts);
}

} // namespace kstab::svg
