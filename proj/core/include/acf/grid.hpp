#pragma once

#include <array>
#include <functional>
#include <vector>

namespace acf {

// Uniform node-centered grid. Node (i, j, k) sits at origin + h * (i, j, k);
// extents count nodes per axis (third axis unused in dimension 2).
struct GridSpec {
  int dim = 2;
  std::array<double, 3> origin{0, 0, 0};
  double h = 0;
  std::array<int, 3> extents{2, 2, 1};
};

struct SampledField {
  GridSpec grid;
  std::vector<double> values;

  size_t index(int i, int j, int k = 0) const {
    return static_cast<size_t>((k * grid.extents[1] + j) * grid.extents[0] + i);
  }
  double& at(int i, int j, int k = 0) { return values[index(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return values[index(i, j, k)]; }
  std::array<double, 3> point(int i, int j, int k = 0) const {
    return {grid.origin[0] + grid.h * i, grid.origin[1] + grid.h * j,
            grid.origin[2] + grid.h * k};
  }
};

// Validated zero field on the given grid.
SampledField make_field(const GridSpec& grid);

// Field sampled from a closed-form function at every node.
SampledField rasterize(const GridSpec& grid,
                       const std::function<double(const std::array<double, 3>&)>& fn);

// Multilinear interpolation; x may sit up to 1e-9 * h outside the box and is
// clamped, anything farther out throws.
double sample(const SampledField& u, const std::array<double, 3>& x);

}  // namespace acf
