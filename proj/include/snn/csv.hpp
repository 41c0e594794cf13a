#pragma once

// Minimal CSV support: comma separated, '.' decimal point, mandatory header,
// no quoting (no field written by this library contains ',' or a newline).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "snn/error.hpp"

namespace snn::csv {

// Shortest representation that parses back to the same double; locale-free.
inline std::string format(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "cannot format double");
  return std::string(buffer, end);
}

inline std::string format(std::uint64_t value) { return std::to_string(value); }

inline double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
  return value;
}

inline std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error(ErrorCode::Parse, "not an unsigned integer: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string join(std::span<const std::string> fields, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) { out << join(fields) << '\n'; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::Parse, "missing CSV column '" + std::string(name) + "'");
  }

  void write(std::ostream& out) const {
    write_row(out, header);
    for (const auto& row : rows) write_row(out, row);
  }
};

inline Table read_table(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Truncated, "CSV has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::Parse, "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                                        std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace snn::csv
