#include "gwlimits/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gwlimits {

std::string format_double(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  // shortest decimal form that parses back to the same double
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::add_row(std::span<const double> values) {
  if (values.size() != width_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_double(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::add_row(std::initializer_list<double> values) {
  add_row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::write(const std::filesystem::path& path) const {
  write_text_file(path, buffer_);
}

void write_trajectory_csv(std::span<const std::uint64_t> trajectory,
                          const std::filesystem::path& path) {
  CsvWriter csv({"generation", "Z"});
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    csv.add_row({static_cast<double>(i), static_cast<double>(trajectory[i])});
  }
  csv.write(path);
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path.string());
  TrajectoryFile out;
  std::string line;
  std::size_t expected_generation = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string gen_field;
    std::string z_field;
    if (!std::getline(row, gen_field, ',') || !std::getline(row, z_field, ',')) {
      throw std::runtime_error("trajectory file: malformed row '" + line + "'");
    }
    char* end = nullptr;
    const double gen = std::strtod(gen_field.c_str(), &end);
    if (end == gen_field.c_str()) {
      if (out.trajectory.empty()) continue;  // header row
      throw std::runtime_error("trajectory file: non-numeric generation '" + gen_field + "'");
    }
    const double z = std::strtod(z_field.c_str(), &end);
    if (gen < 0 || z < 0 || gen != std::floor(gen) || z != std::floor(z)) {
      throw std::runtime_error("trajectory file: counts must be non-negative integers");
    }
    if (static_cast<std::size_t>(gen) != expected_generation) {
      throw std::runtime_error("trajectory file: generations must run 0..n in order");
    }
    out.trajectory.push_back(static_cast<std::uint64_t>(z));
    ++expected_generation;
  }
  if (out.trajectory.size() < 2) {
    throw std::runtime_error("trajectory file: need Z_0 and at least one generation");
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

}  // namespace gwlimits
