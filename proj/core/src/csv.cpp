#include "snnlab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "snnlab/error.hpp"

namespace snnlab {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  for (const auto& comment : table.comments) out << "# " << comment << '\n';
  write_row(out, table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::invalid_input, "row width differs from header in " + path.string());
    }
    write_row(out, row);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(table.header.size()) + " fields, found " +
                                              std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::parse_error, path.string() + ": missing header row");
  return table;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::parse_error, "not a number: '" + text + "'");
  }
  return value;
}

CsvTable points_table(const Trajectory& trajectory, std::span<const int> labels) {
  CsvTable table;
  table.header = {"step", "point_index", "x", "y", "label", "loss"};
  for (const Snapshot& snap : trajectory.snapshots) {
    if (snap.points.cols() != 2) {
      throw Error(ErrorCode::invalid_input, "trajectory export needs 2D points");
    }
    if (snap.points.rows() != labels.size()) {
      throw Error(ErrorCode::invalid_input, "label count differs from point count");
    }
    for (std::size_t i = 0; i < snap.points.rows(); ++i) {
      table.rows.push_back({std::to_string(snap.step), std::to_string(i), format_double(snap.points(i, 0)),
                            format_double(snap.points(i, 1)), std::to_string(labels[i]),
                            format_double(snap.loss)});
    }
  }
  return table;
}

CsvTable metrics_table(const MetricsLog& log) {
  CsvTable table;
  table.header = log.header();
  for (const MetricsRow& row : log.rows) {
    if (row.entanglement.size() != log.layer_count || row.temperature.size() != log.layer_count) {
      throw Error(ErrorCode::invalid_input, "metrics row does not match the layer count");
    }
    std::vector<std::string> fields{std::to_string(row.step), format_double(row.train_ce),
                                    format_double(row.test_ce), format_double(row.train_acc),
                                    format_double(row.test_acc)};
    for (double v : row.entanglement) fields.push_back(format_double(v));
    for (double v : row.temperature) fields.push_back(format_double(v));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

MetricsLog metrics_from_table(const CsvTable& table) {
  if (table.header.size() < 5 || (table.header.size() - 5) % 2 != 0) {
    throw Error(ErrorCode::parse_error, "metrics header has an unexpected width");
  }
  MetricsLog log;
  log.layer_count = (table.header.size() - 5) / 2;
  if (table.header != log.header()) throw Error(ErrorCode::parse_error, "metrics header mismatch");
  for (const auto& fields : table.rows) {
    MetricsRow row;
    row.step = static_cast<std::size_t>(std::stoull(fields[0]));
    row.train_ce = parse_double(fields[1]);
    row.test_ce = parse_double(fields[2]);
    row.train_acc = parse_double(fields[3]);
    row.test_acc = parse_double(fields[4]);
    for (std::size_t l = 0; l < log.layer_count; ++l) {
      row.entanglement.push_back(parse_double(fields[5 + l]));
      row.temperature.push_back(parse_double(fields[5 + log.layer_count + l]));
    }
    log.rows.push_back(std::move(row));
  }
  return log;
}

void write_points_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                      std::span<const int> labels, const std::vector<std::string>& comments) {
  CsvTable table = points_table(trajectory, labels);
  table.comments = comments;
  write_csv(path, table);
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log,
                       const std::vector<std::string>& comments) {
  CsvTable table = metrics_table(log);
  table.comments = comments;
  write_csv(path, table);
}

}  // namespace snnlab
