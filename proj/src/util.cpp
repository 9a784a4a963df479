#include "dpdp/util.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dpdp {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

Sec parse_hms(std::string_view s) {
  auto parts = split(trim(s), ':');
  if (parts.size() != 3)
    throw ParseError("bad time-of-day '" + std::string(s) + "', expected %H:%M:%S");
  Sec h = parse_int(parts[0], "hours");
  Sec m = parse_int(parts[1], "minutes");
  Sec sec = parse_int(parts[2], "seconds");
  if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59)
    throw ParseError("time-of-day out of range: '" + std::string(s) + "'");
  return h * 3600 + m * 60 + sec;
}

Sec parse_hms(std::string_view s, const std::string& locus) {
  try {
    return parse_hms(s);
  } catch (const ParseError& e) {
    throw ParseError(locus + ": " + e.what());
  }
}

std::string format_hms(Sec t) {
  t %= 86400;
  if (t < 0) t += 86400;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", int(t / 3600), int((t / 60) % 60), int(t % 60));
  return buf;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s, const std::string& locus) {
  s = trim(s);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError(locus + ": bad number '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& locus) {
  s = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError(locus + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x00000100000001b3ull;
  }
  return h;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return int(i);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  int c = column(name);
  if (c < 0) throw ParseError(path + ": missing column '" + name + "'");
  return c;
}

std::string CsvTable::locus(std::size_t row) const {
  return path + ":" + std::to_string(row + 2);  // +1 header, +1 one-based
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  CsvTable t;
  t.path = path;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto fields = split(sv, ',');
    for (auto& f : fields) f = std::string(trim(f));
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size())
        throw ParseError(t.locus(t.rows.size()) + ": expected " + std::to_string(t.header.size()) +
                         " fields, got " + std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ParseError(path + ": empty file, header row required");
  return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_csv(const std::string& path, const CsvTable& table) {
  write_csv(path, table.header, table.rows);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << content;
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace dpdp
