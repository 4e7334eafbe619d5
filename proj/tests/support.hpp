#pragma once

#include <initializer_list>

#include <gtest/gtest.h>

#include "cartan/affine.hpp"
#include "cartan/geometry.hpp"

namespace cartan::testing {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Mat rotation(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double distance(const AffineIsometry& a, const AffineIsometry& b) {
  return std::max(max_abs(a.linear - b.linear), max_abs(a.translation - b.translation));
}

}  // namespace cartan::testing
