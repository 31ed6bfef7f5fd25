#include "acf/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace acf {

DiscreteOperator assemble_operator(const SpdMatrix& a, const GridSpec& grid) {
  if (a.dim() != grid.dim) throw std::invalid_argument("assemble_operator: dimension mismatch");
  if (!(grid.h > 0)) throw std::invalid_argument("assemble_operator: spacing must be positive");
  DiscreteOperator op{a, grid, {}, {}};
  const double h2 = grid.h * grid.h;
  const int n = grid.dim;
  double center = 0;
  for (int d = 0; d < n; ++d) {
    std::array<int, 3> off{0, 0, 0};
    off[d] = 1;
    op.offsets.push_back(off);
    op.weights.push_back(a.m.at(d, d) / h2);
    off[d] = -1;
    op.offsets.push_back(off);
    op.weights.push_back(a.m.at(d, d) / h2);
    center -= 2.0 * a.m.at(d, d) / h2;
  }
  for (int d = 0; d < n; ++d)
    for (int e = d + 1; e < n; ++e) {
      const double w = a.m.at(d, e) / (2.0 * h2);
      if (w == 0.0) continue;
      for (int sd : {1, -1})
        for (int se : {1, -1}) {
          std::array<int, 3> off{0, 0, 0};
          off[d] = sd;
          off[e] = se;
          op.offsets.push_back(off);
          op.weights.push_back(sd == se ? w : -w);
        }
    }
  std::array<int, 3> zero{0, 0, 0};
  op.offsets.push_back(zero);
  op.weights.push_back(center);
  return op;
}

double apply_at(const DiscreteOperator& op, const SampledField& u, int i, int j, int k) {
  double s = 0;
  for (size_t t = 0; t < op.offsets.size(); ++t) {
    const auto& o = op.offsets[t];
    s += op.weights[t] * u.at(i + o[0], j + o[1], k + o[2]);
  }
  return s;
}

SampledField apply(const DiscreteOperator& op, const SampledField& u) {
  SampledField out = make_field(u.grid);
  const auto& e = u.grid.extents;
  const int kmax = (u.grid.dim == 3) ? e[2] - 1 : 1;
  const int kmin = (u.grid.dim == 3) ? 1 : 0;
  for (int k = kmin; k < kmax; ++k)
    for (int j = 1; j < e[1] - 1; ++j)
      for (int i = 1; i < e[0] - 1; ++i) out.at(i, j, k) = apply_at(op, u, i, j, k);
  return out;
}

}  // namespace acf
