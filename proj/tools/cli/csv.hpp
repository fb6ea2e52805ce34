#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace chandis::cli {

/// Shortest round-trip decimal form, so output is stable and lossless.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Accumulates rows in memory; `text()` is what ends up on disk.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { add(header); }

  void add(const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) ss_ << ',';
      ss_ << row[i];
    }
    ss_ << '\n';
  }

  std::size_t width() const { return width_; }
  std::string text() const { return ss_.str(); }

private:
  std::size_t width_;
  std::ostringstream ss_;
};

}  // namespace chandis::cli
