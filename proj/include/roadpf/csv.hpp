#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace roadpf {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated reader: no quoting, blank lines skipped.
CsvTable read_csv(const std::filesystem::path& path);

/// Throws CsvError unless the header matches exactly.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

double parse_double(const std::string& field);
long long parse_int(const std::string& field);

/// Fixed-point with `digits` decimals; non-finite values print as nan/inf.
std::string format_fixed(double value, int digits = 6);

}  // namespace roadpf
