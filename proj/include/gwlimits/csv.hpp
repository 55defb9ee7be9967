#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gwlimits {

// Shortest round-trip decimal form; identical digits on every run, which the
// byte-identical-output contract relies on.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::span<const double> values);
  void add_row(std::initializer_list<double> values);
  const std::string& content() const { return buffer_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::string buffer_;
  std::size_t width_;
};

// Two-column trajectory file: generation, Z.
void write_trajectory_csv(std::span<const std::uint64_t> trajectory,
                          const std::filesystem::path& path);

struct TrajectoryFile {
  std::vector<std::uint64_t> trajectory;
};

// Reads a (generation, Z) CSV, tolerating a header row; generations must be
// 0..n in order.
TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gwlimits
