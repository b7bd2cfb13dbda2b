#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace metalearn::csv {

std::string real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string integer(std::int64_t value) { return std::to_string(value); }

Writer::Writer(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  row(header);
}

void Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CSV row has the wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

std::vector<std::string> base_header() {
  return {"method", "lambda", "T", "n", "d", "seed", "test_mse", "ev_pct", "wall_ms"};
}

}  // namespace metalearn::csv
