#ifndef KSTAB_IO_HPP
#define KSTAB_IO_HPP

#include "kstab/core.hpp"
#include "kstab/stability.hpp"

#include <string>
#include <vector>

/**
 * @file io.hpp
 *
 * @brief CSV files for data sets and stability curves.
 *
 * Data set CSVs have a header row naming the columns x1..xd, optionally followed by a
 * final `weight` column. Curve CSVs use the columns k,raw,null,normalized,rescaled,p_value,selected
 * with empty cells for missing values.
 */

namespace kstab {

/// Runtime failure reading or writing a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Formats a double so that parsing it back gives the same value.
std::string format_double(double value);

std::vector<std::string> split_csv_line(const std::string& line);

DataSet read_dataset_csv(const std::string& path);

/// Writes the weight column only when some weight differs from 1.
void write_dataset_csv(const std::string& path, const DataSet& data);

std::string curve_csv(const StabilityCurve& curve);
StabilityCurve read_curve_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

} // namespace kstab

#endif
