#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "epictrl/mesh.hpp"

namespace epictrl {

/// Shortest round-trip-safe text form: 17 significant digits.
std::string format_double(double v);

struct Snapshot {
  Field field;
  std::size_t level = 0;
  std::string name;
};

/// Writes one field as CSV: a '#' header line carrying dimension, cells,
/// lengths and time level, a "value" column header, then one row per cell in
/// row-major order.
void write_snapshot(const std::filesystem::path& path, const Field& field, std::size_t level,
                    std::string_view name = "field");

/// Reads a snapshot, taking the mesh from its header.
Snapshot read_snapshot(const std::filesystem::path& path);

/// Reads a snapshot and throws FormatError if its header does not describe `expected`.
Snapshot read_snapshot(const std::filesystem::path& path, const Mesh& expected);

/// Plain CSV table writer with optional leading '#' comment lines.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& comments,
            const std::vector<std::string>& columns);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// 64-bit FNV-1a, printed as 16 hex digits. Used to tag outputs with the config they came from.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace epictrl
