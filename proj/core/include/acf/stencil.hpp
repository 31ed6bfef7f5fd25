#pragma once

#include <vector>

#include "acf/grid.hpp"
#include "acf/linalg.hpp"

namespace acf {

// Constant-coefficient stencil for div(A grad u) on a uniform grid: 5/9 point
// in the plane, 7/19 point in space, cross terms split symmetrically over the
// diagonal neighbors so the operator stays symmetric as a quadratic form.
struct DiscreteOperator {
  SpdMatrix a;
  GridSpec grid;
  std::vector<std::array<int, 3>> offsets;
  std::vector<double> weights;  // already divided by h^2
};

DiscreteOperator assemble_operator(const SpdMatrix& a, const GridSpec& grid);

// Stencil applied at one interior node.
double apply_at(const DiscreteOperator& op, const SampledField& u, int i, int j, int k = 0);

// Full application; boundary nodes of the output are set to zero.
SampledField apply(const DiscreteOperator& op, const SampledField& u);

}  // namespace acf
