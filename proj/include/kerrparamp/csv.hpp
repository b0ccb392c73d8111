#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace kerrparamp {

/// RFC 4180 writer: CRLF line ends, fields quoted only when needed.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string csv_escape(const std::string& field);
/// Shortest-style "%.{precision}g"; NaN and empty optionals give "".
std::string format_number(double value, int precision);
std::string format_number(const std::optional<double>& value, int precision);

}  // namespace kerrparamp
