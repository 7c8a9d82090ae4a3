#include "kstab/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kstab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, const std::string& where) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw IoError(where + ": empty cell");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        throw IoError(where + ": '" + t + "' is not a number");
    }
    return v;
}

std::optional<double> parse_optional(const std::string& cell, const std::string& where) {
    if (trim(cell).empty()) {
        return std::nullopt;
    }
    return parse_number(cell, where);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << contents;
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

DataSet read_dataset_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw IoError(path + ": empty file");
    }
    const auto header = split_csv_line(lines[0]);
    const bool weighted = !header.empty() && header.back() == "weight";
    const Index d = static_cast<Index>(header.size()) - (weighted ? 1 : 0);
    if (d < 1) {
        throw IoError(path + ": header names no coordinate columns");
    }
    for (Index j = 0; j < d; ++j) {
        if (header[j] != "x" + std::to_string(j + 1)) {
            throw IoError(path + ": expected header column 'x" + std::to_string(j + 1) + "', found '" + header[j] + "'");
        }
    }
    const Index n = static_cast<Index>(lines.size()) - 1;
    if (n < 1) {
        throw IoError(path + ": no data rows");
    }
    Matrix pts(n, d);
    Vector w = Vector::Ones(n);
    for (Index i = 0; i < n; ++i) {
        const auto cells = split_csv_line(lines[i + 1]);
        const std::string where = path + ":" + std::to_string(i + 2);
        if (cells.size() != header.size()) {
            throw IoError(where + ": expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        for (Index j = 0; j < d; ++j) {
            pts(i, j) = parse_number(cells[j], where);
        }
        if (weighted) {
            w[i] = parse_number(cells[d], where);
        }
    }
    return make_dataset(std::move(pts), std::move(w), "file:" + path);
}

void write_dataset_csv(const std::string& path, const DataSet& data) {
    std::string out;
    const bool weighted = !data.unit_weights();
    for (Index j = 0; j < data.dim(); ++j) {
        out += (j ? ",x" : "x") + std::to_string(j + 1);
    }
    out += weighted ? ",weight\n" : "\n";
    for (Index i = 0; i < data.size(); ++i) {
        for (Index j = 0; j < data.dim(); ++j) {
            if (j) {
                out += ',';
            }
            out += format_double(data.points()(i, j));
        }
        if (weighted) {
            out += "," + format_double(data.weights()[i]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

std::string curve_csv(const StabilityCurve& curve) {
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::string out = "k,raw,null,normalized,rescaled,p_value,selected\n";
    for (const auto& row : curve.rows) {
        out += std::to_string(row.k) + "," + format_double(row.raw) + "," + cell(row.null) + "," + cell(row.normalized) + "," +
               cell(row.rescaled) + "," + cell(row.p_value) + "," + (curve.selected_k == row.k ? "1" : "0") + "\n";
    }
    return out;
}

StabilityCurve read_curve_csv(const std::string& path) {
    const auto lines = read_lines(path);
    const std::vector<std::string> expected{"k", "raw", "null", "normalized", "rescaled", "p_value", "selected"};
    if (lines.empty() || split_csv_line(lines[0]) != expected) {
        throw IoError(path + ": missing or malformed curve header (expected k,raw,null,normalized,rescaled,p_value,selected)");
    }
    StabilityCurve curve;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv_line(lines[i]);
        const std::string where = path + ":" + std::to_string(i + 1);
        if (cells.size() != expected.size()) {
            throw IoError(where + ": expected 7 cells, found " + std::to_string(cells.size()));
        }
        CurveRow row;
        const double k = parse_number(cells[0], where);
        row.k = static_cast<int>(k);
        if (row.k != k) {
            throw IoError(where + ": k must be an integer");
        }
        row.raw = parse_number(cells[1], where);
        row.null = parse_optional(cells[2], where);
        row.normalized = parse_optional(cells[3], where);
        row.rescaled = parse_optional(cells[4], where);
        row.p_value = parse_optional(cells[5], where);
        if (cells[6] == "1") {
            curve.selected_k = row.k;
        } else if (cells[6] != "0") {
            throw IoError(where + ": selected must be 0 or 1");
        }
        curve.rows.push_back(row);
    }
    if (curve.rows.empty()) {
        throw IoError(path + ": curve has no rows");
    }
    try {
        validate(curve);
    } catch (const InvalidArgument& e) {
        throw IoError(path + ": " + e.what());
    }
    return curve;
}

} // namespace kstab
