#pragma once

#include <array>

#include "acf/grid.hpp"

namespace acf::cell {

// Gradient at the center of the cell with lower corner (i, j, k), from the
// compact corner difference. Exact for fields that are linear on the cell,
// which keeps one-sided kinks along grid lines from smearing.
inline std::array<double, 3> gradient(const SampledField& u, int i, int j, int k) {
  const double h = u.grid.h;
  if (u.grid.dim == 2) {
    const double gx = (u.at(i + 1, j) + u.at(i + 1, j + 1) - u.at(i, j) - u.at(i, j + 1)) /
                      (2 * h);
    const double gy = (u.at(i, j + 1) + u.at(i + 1, j + 1) - u.at(i, j) - u.at(i + 1, j)) /
                      (2 * h);
    return {gx, gy, 0};
  }
  double gx = 0, gy = 0, gz = 0;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c) {
      gx += u.at(i + 1, j + b, k + c) - u.at(i, j + b, k + c);
      gy += u.at(i + b, j + 1, k + c) - u.at(i + b, j, k + c);
      gz += u.at(i + b, j + c, k + 1) - u.at(i + b, j + c, k);
    }
  return {gx / (4 * h), gy / (4 * h), gz / (4 * h)};
}

inline double average(const SampledField& u, int i, int j, int k) {
  if (u.grid.dim == 2)
    return 0.25 * (u.at(i, j) + u.at(i + 1, j) + u.at(i, j + 1) + u.at(i + 1, j + 1));
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) s += u.at(i + a, j + b, k + c);
  return s / 8.0;
}

inline std::array<double, 3> center(const GridSpec& g, int i, int j, int k) {
  return {g.origin[0] + g.h * (i + 0.5), g.origin[1] + g.h * (j + 0.5),
          g.dim == 3 ? g.origin[2] + g.h * (k + 0.5) : 0.0};
}

}  // namespace acf::cell
