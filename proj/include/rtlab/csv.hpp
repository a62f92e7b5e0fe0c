#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "rtlab/error.hpp"

namespace rtlab {

/// Comma-separated output with a header row, '.' decimals, 17 significant
/// digits and LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
      : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw Error(fmt::format("cannot write '{}'", path.string()));
    line(header);
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> text{format_cell(cells)...};
    line(text);
  }

  void line(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  template <typename T>
  static std::string format_cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return fmt::format("{:.17g}", v);
    } else if constexpr (std::is_integral_v<T>) {
      return fmt::format("{}", v);
    } else {
      return std::string(v);
    }
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace rtlab
