#pragma once

#include <initializer_list>
#include <vector>

#include "metalearn/types.hpp"

namespace metalearn::testing {

inline Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  const auto d = static_cast<Eigen::Index>(values.begin()->size());
  Matrix m(n, d);
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Matrix diag(std::initializer_list<double> values) { return vec(values).asDiagonal(); }

inline TaskDataset data(std::initializer_list<std::initializer_list<double>> inputs,
                        std::initializer_list<double> outputs, bool compliant = false) {
  return validate_dataset(rows(inputs), vec(outputs), compliant);
}

}  // namespace metalearn::testing
