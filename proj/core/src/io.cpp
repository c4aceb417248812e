#include "epictrl/io.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "epictrl/errors.hpp"

namespace epictrl {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

std::string join_axes(const Mesh& m, bool lengths) {
  std::string out;
  for (int a = 0; a < m.dimension(); ++a) {
    if (a > 0) out += 'x';
    out += lengths ? format_double(m.length(a)) : std::to_string(m.cells(a));
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    if (k == s.size() || s[k] == sep) {
      parts.emplace_back(s.substr(start, k - start));
      start = k + 1;
    }
  }
  return parts;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(path.string() + ": not a number: '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const std::filesystem::path& path) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError(path.string() + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Field& field, std::size_t level,
                    std::string_view name) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const Mesh& m = field.mesh();
  out << "# epictrl-snapshot dimension=" << m.dimension() << " cells=" << join_axes(m, false)
      << " lengths=" << join_axes(m, true) << " level=" << level << " name=" << name << '\n';
  out << "value\n";
  for (double v : field.values()) out << format_double(v) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  std::string header;
  std::getline(in, header);
  const std::string tag = "# epictrl-snapshot ";
  if (header.rfind(tag, 0) != 0) throw FormatError(path.string() + ": missing snapshot header");

  std::map<std::string, std::string> kv;
  for (const auto& token : split(std::string_view(header).substr(tag.size()), ' ')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  for (const char* key : {"dimension", "cells", "lengths", "level"}) {
    if (!kv.contains(key)) throw FormatError(path.string() + ": header lacks '" + key + "'");
  }
  const int dim = static_cast<int>(parse_long(kv["dimension"], path));
  std::vector<int> cells;
  std::vector<double> lengths;
  for (const auto& c : split(kv["cells"], 'x')) cells.push_back(static_cast<int>(parse_long(c, path)));
  for (const auto& l : split(kv["lengths"], 'x')) lengths.push_back(parse_double(l, path));
  Mesh mesh = [&] {
    try {
      return Mesh::build(dim, cells, lengths);
    } catch (const ConfigError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }();

  std::string line;
  std::getline(in, line);
  if (line != "value") throw FormatError(path.string() + ": expected 'value' column header");
  std::vector<double> values;
  values.reserve(mesh.num_cells());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(parse_double(line, path));
  }
  if (values.size() != mesh.num_cells()) {
    throw FormatError(path.string() + ": header promises " + std::to_string(mesh.num_cells()) +
                      " cells, file has " + std::to_string(values.size()) + " rows");
  }
  return Snapshot{Field(mesh, std::move(values)), static_cast<std::size_t>(parse_long(kv["level"], path)),
                  kv.contains("name") ? kv["name"] : std::string()};
}

Snapshot read_snapshot(const std::filesystem::path& path, const Mesh& expected) {
  Snapshot snap = read_snapshot(path);
  if (!(snap.field.mesh() == expected)) {
    throw FormatError(path.string() + ": snapshot mesh does not match the expected mesh");
  }
  return snap;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& comments,
                     const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& c : comments) out_ << "# " << c << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw Error("CSV row has the wrong number of columns");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
  out_ << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace epictrl
