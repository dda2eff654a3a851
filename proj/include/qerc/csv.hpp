#pragma once
// Deterministic, locale-independent CSV output.

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qerc::csv {

// Shortest-exact-fallback formatting with 15 significant digits, via
// std::to_chars so the C locale never leaks in.
inline std::string format_double(double v, int precision = 15) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general,
                    precision);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

class Writer {
 public:
  explicit Writer(std::string header) { rows_.push_back(std::move(header)); }

  void add_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) row += ',';
      row += cells[i];
    }
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    for (const auto& r : rows_) {
      out += r;
      out += '\n';
    }
    return out;
  }

  void write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << str();
  }

 private:
  std::vector<std::string> rows_;
};

}  // namespace qerc::csv
