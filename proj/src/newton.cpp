#include "dirac/newton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dirac {

Mat forward_jacobian(const ResidualFn& f, const Vec& z, const Vec& fz) {
  Mat jac(fz.size(), z.size());
  Vec zp = z;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double h = std::sqrt(kEps) * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + h;
    jac.col(j) = (f(zp) - fz) / h;
    zp[j] = z[j];
  }
  return jac;
}

NewtonResult newton_solve(const ResidualFn& f, const Vec& z0, const NewtonOptions& opts,
                          const JacobianFn& jac) {
  NewtonResult out;
  out.z = z0;
  Vec r = f(out.z);
  if (r.size() != z0.size()) throw DimensionError("newton_solve: residual size differs from unknown size");
  double nr = inf_norm(r);
  if (!std::isfinite(nr)) throw SolverError("newton_solve: non-finite residual at initial guess");

  Eigen::PartialPivLU<Mat> lu;
  bool fresh = false;
  auto rebuild = [&]() {
    const Mat j = jac ? jac(out.z) : forward_jacobian(f, out.z, r);
    lu.compute(j);
    ++out.jacobians;
    fresh = true;
    if (!(lu.rcond() > 1e-14)) throw SolverError("newton_solve: singular Jacobian");
  };

  const auto scale = [&]() { return 1.0 + inf_norm(out.z); };
  const double floor_factor = 16.0 * kEps;
  if (z0.size() > 0) rebuild();

  while (out.iterations < opts.max_iter && z0.size() > 0) {
    if (nr <= floor_factor * scale()) break;
    const Vec dz = -lu.solve(r);
    double step = 1.0;
    bool accepted = false;
    Vec z_try, r_try;
    double n_try = nr;
    while (step >= 1.0 / 1024.0) {
      z_try = out.z + step * dz;
      r_try = f(z_try);
      n_try = inf_norm(r_try);
      if (std::isfinite(n_try) && n_try < nr) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        rebuild();
        continue;
      }
      break;
    }
    ++out.iterations;
    const double rate = n_try / nr;
    out.z = z_try;
    r = r_try;
    nr = n_try;
    fresh = false;
    if (rate > 0.5 && nr <= opts.tol * scale()) break;
    if (rate > opts.refresh) rebuild();
  }
  out.residual = nr;
  if (!(nr <= opts.tol * scale())) {
    std::ostringstream os;
    os << "Newton failed to converge: residual " << nr << " after " << out.iterations
       << " iterations";
    throw SolverError(os.str());
  }
  return out;
}

}  // namespace dirac
