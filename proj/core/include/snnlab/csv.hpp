#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snnlab/pointlab.hpp"
#include "snnlab/train.hpp"

namespace snnlab {

/// A CSV file: leading '#' comment lines, one header row, data rows.
/// Fields never contain commas or quotes, so no quoting is done.
struct CsvTable {
  std::vector<std::string> comments;  ///< without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const CsvTable&) const = default;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Skips comment lines anywhere in the file; throws ParseError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// 17 significant digits, enough to read back the identical double.
std::string format_double(double value);
double parse_double(const std::string& text);

/// step, point_index, x, y, label, loss; one row per point per snapshot.
CsvTable points_table(const Trajectory& trajectory, std::span<const int> labels);
CsvTable metrics_table(const MetricsLog& log);
MetricsLog metrics_from_table(const CsvTable& table);

void write_points_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                      std::span<const int> labels, const std::vector<std::string>& comments = {});
void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log,
                       const std::vector<std::string>& comments = {});

}  // namespace snnlab
