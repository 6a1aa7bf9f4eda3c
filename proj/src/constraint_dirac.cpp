#include "dirac/constraint_dirac.hpp"

#include <algorithm>

namespace dirac {

ConstraintDistribution::ConstraintDistribution(int n, int m, ConstraintFormFn omega, Box domain)
    : n_(n), m_(m), omega_(std::move(omega)), domain_(std::move(domain)) {
  if (n < 1) throw DimensionError("ConstraintDistribution: base dimension must be at least 1");
  if (m < 0 || m > n) throw DimensionError("ConstraintDistribution: rank must lie in [0, n]");
  if (domain_.bounded() && domain_.lo.size() != n) throw DimensionError("ConstraintDistribution: domain box dimension");
}

ConstraintDistribution ConstraintDistribution::unconstrained(int n) {
  return ConstraintDistribution(n, n, [n](const Vec&) { return Mat(0, n); });
}

ConstraintDistribution ConstraintDistribution::constant(const Mat& omega) {
  const auto n = static_cast<int>(omega.cols());
  const auto k = static_cast<int>(omega.rows());
  ConstraintDistribution cd(n, n - k, [omega](const Vec&) { return omega; });
  cd.checked_omega(Vec::Zero(n));
  return cd;
}

Mat ConstraintDistribution::omega(const Vec& x) const {
  require_size(x, n_, "ConstraintDistribution point");
  if (!domain_.contains(x)) throw DomainError("ConstraintDistribution: point outside domain");
  Mat w = omega_(x);
  if (w.rows() != k() || w.cols() != n_) throw DimensionError("ConstraintDistribution: omega has wrong shape");
  return w;
}

Mat ConstraintDistribution::checked_omega(const Vec& x) const {
  Mat w = omega(x);
  if (k() == 0) return w;
  Eigen::JacobiSVD<Mat> svd(w);
  const Vec& s = svd.singularValues();
  if (!(s[s.size() - 1] >= 1e-8 * s[0]) || !(s[0] > 0.0)) {
    throw InvariantError("ConstraintDistribution: omega(x) is rank deficient");
  }
  return w;
}

ConstraintDistribution ConstraintDistribution::rescaled(std::function<Mat(const Vec&)> r) const {
  auto base = omega_;
  return ConstraintDistribution(n_, m_, [base, r](const Vec& x) -> Mat { return r(x) * base(x); },
                                domain_);
}

void ConstraintDistribution::validate(std::mt19937_64& rng, int probes, double radius) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int j = 0; j < probes; ++j) {
    Vec x(n_);
    for (int i = 0; i < n_; ++i) {
      x[i] = domain_.bounded()
                 ? 0.5 * (domain_.lo[i] + domain_.hi[i]) + 0.45 * (domain_.hi[i] - domain_.lo[i]) * unit(rng)
                 : radius * unit(rng);
    }
    checked_omega(x);
  }
}

ConstraintFrame constraint_frame(const ConstraintDistribution& cd, const Vec& x) {
  const Mat w = cd.checked_omega(x);
  const int n = cd.n();
  const int k = cd.k();
  ConstraintFrame f;
  if (k == 0) {
    f.delta = Mat::Identity(n, n);
    f.annihilator.resize(n, 0);
    return f;
  }
  Eigen::HouseholderQR<Mat> qr(w.transpose());
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  f.annihilator = q.leftCols(k);
  f.delta = q.rightCols(n - k);
  return f;
}

Subspace delta_fiber(const ConstraintDistribution& cd, const Vec& x) {
  return Subspace::from_orthonormal(cd.n(), constraint_frame(cd, x).delta);
}

std::vector<Vec> annihilator_basis(const ConstraintDistribution& cd, const Vec& x) {
  const Mat a = constraint_frame(cd, x).annihilator;
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.cols(); ++i) out.emplace_back(a.col(i));
  return out;
}

Vec row_space_residual(const Mat& omega, const Vec& r) {
  if (omega.rows() == 0) return r;
  const Eigen::CompleteOrthogonalDecomposition<Mat> cod(omega.transpose());
  const Vec c = cod.solve(r);
  return r - omega.transpose() * c;
}

MembershipReport induced_dirac_membership(const ConstraintDistribution& cd, const Vec& x,
                                          const Vec& p, const DiracCandidate& cand, double tol) {
  const int n = cd.n();
  require_size(x, n, "membership state x");
  require_size(p, n, "membership state p");
  require_size(cand.xdot, n, "membership xdot");
  require_size(cand.pdot, n, "membership pdot");
  require_size(cand.a, n, "membership a");
  require_size(cand.w, n, "membership w");
  const Mat w = cd.omega(x);
  MembershipReport rep;
  rep.scale = std::max({1.0, inf_norm(cand.xdot), inf_norm(cand.pdot), inf_norm(cand.a),
                        inf_norm(cand.w)});
  // Distance of xdot from Delta_x, measured with orthonormalized rows so the
  // verdict does not depend on how omega is scaled.
  if (w.rows() > 0) {
    const Mat ann = constraint_frame(cd, x).annihilator;
    rep.tangent_residual = inf_norm(ann.transpose() * cand.xdot);
  }
  rep.velocity_residual = inf_norm(cand.w - cand.xdot);
  rep.annihilator_residual = inf_norm(row_space_residual(w, cand.a + cand.pdot));
  const double lim = tol * rep.scale;
  rep.member = rep.tangent_residual <= lim && rep.velocity_residual <= lim &&
               rep.annihilator_residual <= lim;
  return rep;
}

}  // namespace dirac
