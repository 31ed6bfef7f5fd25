#pragma once

#include <functional>
#include <vector>

namespace acf {

// Generalized symmetric tridiagonal pencil K u = lambda M u with diagonal
// positive mass M. diag/off hold K, mass holds M.
struct TridiagSystem {
  std::vector<double> diag;
  std::vector<double> off;  // size diag.size() - 1
  std::vector<double> mass;
  std::vector<double> coords;  // physical location of each unknown
};

struct SmallestEigen {
  double lambda = 0;
  std::vector<double> vec;  // sign-normalized, max entry 1
  double residual = 0;      // ||K v - lambda M v||_2 / (max(1,|lambda|) ||M v||_2)
  int iterations = 0;
};

// Smallest eigenpair: bisection on the Sturm pivot count of the similarity
// transformed standard problem, then inverse iteration and a final Rayleigh
// quotient. Throws NumericalError past max_iter_factor * n iterations.
SmallestEigen smallest_eigenpair(const TridiagSystem& sys, int max_iter_factor = 10);

// Node-centered discretization of -(p u')' + q u = lambda w u on (a, b) with
// Dirichlet ends; unknowns at the n-1 interior nodes of an n-interval grid.
TridiagSystem build_node_dirichlet(double a, double b, int n,
                                   const std::function<double(double)>& p,
                                   const std::function<double(double)>& q,
                                   const std::function<double(double)>& w);

// Cell-centered variant with a Dirichlet left face and a natural right face,
// for coefficients p that vanish at b (no flux crosses the right end).
TridiagSystem build_cell_dirichlet_natural(double a, double b, int n,
                                           const std::function<double(double)>& p,
                                           const std::function<double(double)>& q,
                                           const std::function<double(double)>& w);

}  // namespace acf
