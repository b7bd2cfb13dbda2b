#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace metalearn::csv {

/// 17 significant digits ("%.17g"), '.' decimal separator.
std::string real(double value);
std::string integer(std::int64_t value);

/// LF-terminated rows; fields never contain commas so no quoting is done.
class Writer {
 public:
  Writer(std::ostream& out, std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// Columns every result table starts with.
std::vector<std::string> base_header();

}  // namespace metalearn::csv
