#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpdp {

using Sec = std::int64_t;

// Thrown on malformed tabular/JSON input; message carries the file/row locus.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// "%H:%M:%S" <-> seconds. Formatting wraps at 24h; parsing accepts 00..23 hours.
Sec parse_hms(std::string_view s);
Sec parse_hms(std::string_view s, const std::string& locus);
std::string format_hms(Sec t);

// Shortest round-trip decimal representation.
std::string format_double(double v);
double parse_double(std::string_view s, const std::string& locus);
std::int64_t parse_int(std::string_view s, const std::string& locus);

// Stable 64-bit FNV-1a, used for reproducible keyed tie-breaking.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull);

// Minimal strict CSV: comma-separated, no quoting, header row required.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  int require_column(const std::string& name) const;
  std::string locus(std::size_t row) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv(const std::string& path, const CsvTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dpdp
