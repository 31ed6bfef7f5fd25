#include "acf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acf {

SampledField make_field(const GridSpec& grid) {
  if (grid.dim != 2 && grid.dim != 3)
    throw std::invalid_argument("make_field: dimension must be 2 or 3");
  if (!(grid.h > 0)) throw std::invalid_argument("make_field: spacing must be positive");
  for (int d = 0; d < grid.dim; ++d)
    if (grid.extents[d] < 2) throw std::invalid_argument("make_field: extents below 2");
  if (grid.dim == 2 && grid.extents[2] != 1)
    throw std::invalid_argument("make_field: planar grid must have a single layer");
  SampledField f;
  f.grid = grid;
  f.values.assign(static_cast<size_t>(grid.extents[0]) * grid.extents[1] * grid.extents[2],
                  0.0);
  return f;
}

SampledField rasterize(const GridSpec& grid,
                       const std::function<double(const std::array<double, 3>&)>& fn) {
  SampledField f = make_field(grid);
  for (int k = 0; k < grid.extents[2]; ++k)
    for (int j = 0; j < grid.extents[1]; ++j)
      for (int i = 0; i < grid.extents[0]; ++i) f.at(i, j, k) = fn(f.point(i, j, k));
  return f;
}

double sample(const SampledField& u, const std::array<double, 3>& x) {
  const GridSpec& g = u.grid;
  double t[3] = {0, 0, 0};
  int base[3] = {0, 0, 0};
  for (int d = 0; d < g.dim; ++d) {
    const double s = (x[d] - g.origin[d]) / g.h;
    const double hi = g.extents[d] - 1.0;
    if (s < -1e-9 || s > hi + 1e-9)
      throw std::invalid_argument("sample: point outside the grid box");
    const double sc = std::clamp(s, 0.0, hi);
    base[d] = std::min(static_cast<int>(sc), g.extents[d] - 2);
    t[d] = sc - base[d];
  }
  if (g.dim == 2) {
    const double v00 = u.at(base[0], base[1]), v10 = u.at(base[0] + 1, base[1]);
    const double v01 = u.at(base[0], base[1] + 1), v11 = u.at(base[0] + 1, base[1] + 1);
    return (1 - t[0]) * (1 - t[1]) * v00 + t[0] * (1 - t[1]) * v10 +
           (1 - t[0]) * t[1] * v01 + t[0] * t[1] * v11;
  }
  double acc = 0;
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        const double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) *
                         (dk ? t[2] : 1 - t[2]);
        acc += w * u.at(base[0] + di, base[1] + dj, base[2] + dk);
      }
  return acc;
}

}  // namespace acf
