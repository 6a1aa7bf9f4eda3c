#pragma once

#include "dirac/numerics.hpp"

namespace dirac {

struct NewtonOptions {
  double tol = 1e-10;      // success threshold, relative to 1 + |z|_inf
  int max_iter = 50;
  double refresh = 0.25;   // rebuild the Jacobian when contraction is worse than this
};

struct NewtonResult {
  Vec z;
  double residual = 0.0;
  int iterations = 0;
  int jacobians = 0;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

// Forward-difference Jacobian, one column per unknown.
Mat forward_jacobian(const ResidualFn& f, const Vec& z, const Vec& fz);

// Damped chord Newton: the Jacobian is reused while the residual contracts
// fast enough and rebuilt otherwise; iterates until the residual stops
// decreasing. Throws SolverError unless the final residual meets tol.
NewtonResult newton_solve(const ResidualFn& f, const Vec& z0,
                          const NewtonOptions& opts = {},
                          const JacobianFn& jac = {});

}  // namespace dirac
