#pragma once

#include <functional>
#include <vector>

namespace acf {

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
// on the Legendre recurrence to machine precision.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Adaptive bisection with an embedded 7/15 point Gauss pair per panel.
// Splits until the summed error estimate meets abs_tol; throws NumericalError
// if the panel budget is exhausted before that.
double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                      double abs_tol);

}  // namespace acf
