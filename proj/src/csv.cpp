#include "roadpf/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace roadpf {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      table.header = split(line);
      have_header = true;
      continue;
    }
    auto row = split(line);
    if (row.size() != table.header.size()) {
      throw CsvError(path.string() + ": row has " + std::to_string(row.size()) + " fields, expected " +
                     std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw CsvError(path.string() + ": missing header");
  return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
  if (table.header == expected) return;
  std::string want;
  for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
  throw CsvError(path.string() + ": expected header '" + want + "'");
}

double parse_double(const std::string& field) {
  if (field == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw CsvError("bad number '" + field + "'");
    return v;
  } catch (const std::logic_error&) {
    throw CsvError("bad number '" + field + "'");
  }
}

long long parse_int(const std::string& field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) throw CsvError("bad integer '" + field + "'");
  return v;
}

std::string format_fixed(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace roadpf
