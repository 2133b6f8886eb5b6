#pragma once

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longi::io {

/// Round-trippable, locale-independent rendering of a double ("%.17g").
std::string number(double v);

/// Builds CSV text with a fixed header; rows are written in call order.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  const std::string& str() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::size_t columns_;
  std::string text_;
};

/// Hex SHA-256 digest of a byte string.
std::string sha256_hex(std::string_view bytes);

void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace longi::io
