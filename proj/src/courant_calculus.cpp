#include "dirac/courant_calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dirac {

SectionField::SectionField(int n, VectorFieldFn X, VectorFieldFn alpha, Box domain)
    : n_(n), X_(std::move(X)), alpha_(std::move(alpha)), domain_(std::move(domain)) {
  if (n < 1) throw DimensionError("SectionField: dimension must be at least 1");
  if (domain_.bounded() && domain_.lo.size() != n) throw DimensionError("SectionField: domain box dimension");
}

SectionField SectionField::constant(const Vec& X, const Vec& alpha) {
  require_same_size(X, alpha, "SectionField::constant");
  const auto n = static_cast<int>(X.size());
  SectionField s(n, [X](const Vec&) { return X; }, [alpha](const Vec&) { return alpha; });
  s.with_jacobians([n](const Vec&) { return Mat::Zero(n, n); },
                   [n](const Vec&) { return Mat::Zero(n, n); });
  return s;
}

SectionField& SectionField::with_jacobians(JacobianFieldFn dX, JacobianFieldFn dalpha) {
  dX_ = std::move(dX);
  dalpha_ = std::move(dalpha);
  return *this;
}

void SectionField::check_point(const Vec& x) const {
  require_size(x, n_, "SectionField point");
  if (!domain_.contains(x)) throw DomainError("SectionField: point outside domain");
}

PontryaginElement SectionField::at(const Vec& x) const {
  check_point(x);
  Vec X = X_(x);
  Vec a = alpha_(x);
  require_size(X, n_, "SectionField vector part");
  require_size(a, n_, "SectionField covector part");
  return {std::move(X), std::move(a)};
}

Mat SectionField::jacobian_X(const Vec& x, double step_scale) const {
  check_point(x);
  if (dX_) return dX_(x);
  return jacobian_fd(X_, x, domain_, step_scale);
}

Mat SectionField::jacobian_alpha(const Vec& x, double step_scale) const {
  check_point(x);
  if (dalpha_) return dalpha_(x);
  return jacobian_fd(alpha_, x, domain_, step_scale);
}

double SectionField::validate(std::mt19937_64& rng, int probes, double radius) const {
  if (!has_exact_jacobians()) return 0.0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    Vec x(n_);
    for (int i = 0; i < n_; ++i) {
      if (domain_.bounded()) {
        const double mid = 0.5 * (domain_.lo[i] + domain_.hi[i]);
        const double half = 0.45 * (domain_.hi[i] - domain_.lo[i]);
        x[i] = mid + half * unit(rng);
      } else {
        x[i] = radius * unit(rng);
      }
    }
    const Mat fx = jacobian_fd(X_, x, domain_);
    const Mat fa = jacobian_fd(alpha_, x, domain_);
    const double sx = std::max(1.0, fx.cwiseAbs().maxCoeff());
    const double sa = std::max(1.0, fa.cwiseAbs().maxCoeff());
    worst = std::max(worst, (dX_(x) - fx).cwiseAbs().maxCoeff() / sx);
    worst = std::max(worst, (dalpha_(x) - fa).cwiseAbs().maxCoeff() / sa);
  }
  if (worst > 1e-5) throw InvariantError("SectionField: supplied Jacobians disagree with finite differences");
  return worst;
}

namespace {

PontryaginElement bracket_value(const SectionField& s1, const SectionField& s2, const Vec& x,
                                const BracketOptions& opts, double step_scale) {
  const PontryaginElement a = s1.at(x);
  const PontryaginElement b = s2.at(x);
  const Mat dX = s1.jacobian_X(x, step_scale);
  const Mat da = s1.jacobian_alpha(x, step_scale);
  const Mat dY = s2.jacobian_X(x, step_scale);
  const Mat db = s2.jacobian_alpha(x, step_scale);

  const Vec lie = dY * a.u - dX * b.u;
  const Vec lx_beta = db * a.u + dX.transpose() * b.alpha;
  const Vec ly_alpha = da * b.u + dY.transpose() * a.alpha;
  // d(a(Y) - b(X)); the working form subtracts half of it, the classical adds it.
  const Vec grad = dY.transpose() * a.alpha + da.transpose() * b.u - dX.transpose() * b.alpha -
                   db.transpose() * a.u;
  const double sign = opts.convention == BracketConvention::kWorking ? -0.5 : 0.5;
  return {lie, lx_beta - ly_alpha + sign * grad};
}

}  // namespace

BracketResult courant_bracket(const SectionField& s1, const SectionField& s2, const Vec& x,
                              const BracketOptions& opts) {
  if (s1.dim() != s2.dim()) throw DimensionError("courant_bracket: sections over different bases");
  BracketResult res{bracket_value(s1, s2, x, opts, opts.step_scale), 0.0};
  if (!(s1.has_exact_jacobians() && s2.has_exact_jacobians())) {
    const PontryaginElement coarse = bracket_value(s1, s2, x, opts, 2.0 * opts.step_scale);
    res.residual_estimate =
        std::max(inf_norm(coarse.u - res.value.u), inf_norm(coarse.alpha - res.value.alpha)) / 3.0;
  }
  return res;
}

double courant_tensor(const SectionField& s1, const SectionField& s2, const SectionField& s3,
                      const Vec& x, const BracketOptions& opts) {
  const double t12 = pairing(courant_bracket(s1, s2, x, opts).value, s3.at(x));
  const double t23 = pairing(courant_bracket(s2, s3, x, opts).value, s1.at(x));
  const double t31 = pairing(courant_bracket(s3, s1, x, opts).value, s2.at(x));
  return t12 + t23 + t31;
}

InvolutivityReport involutivity_test(const std::vector<SectionField>& frame,
                                     const std::vector<Vec>& points, const BracketOptions& opts,
                                     Execution exec) {
  InvolutivityReport rep;
  if (frame.empty()) throw ArgumentError("involutivity_test: empty frame");
  const int r = static_cast<int>(frame.size());
  std::vector<std::array<int, 3>> triples;
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j)
      for (int k = j; k < r; ++k) triples.push_back({i, j, k});
  rep.points = static_cast<int>(points.size());
  rep.triples = static_cast<int>(triples.size());

  const int np = rep.points;
  std::vector<double> worst(static_cast<std::size_t>(np), 0.0);
  std::vector<double> size(static_cast<std::size_t>(np), 0.0);
  for_each_index(exec, np, [&](int p) {
    const Vec& x = points[static_cast<std::size_t>(p)];
    Mat vals(2 * frame[0].dim(), r);
    for (int i = 0; i < r; ++i) vals.col(i) = frame[static_cast<std::size_t>(i)].at(x).flat();
    if (numerical_rank(vals) < r) throw InvariantError("involutivity_test: dependent frame at a sample point");
    double w = 0.0;
    for (const auto& t : triples) {
      const double v = courant_tensor(frame[static_cast<std::size_t>(t[0])],
                                      frame[static_cast<std::size_t>(t[1])],
                                      frame[static_cast<std::size_t>(t[2])], x, opts);
      w = std::max(w, std::abs(v));
    }
    worst[static_cast<std::size_t>(p)] = w;
    size[static_cast<std::size_t>(p)] = vals.cwiseAbs().maxCoeff();
  });

  double smax = 0.0;
  int arg = -1;
  for (int p = 0; p < np; ++p) {
    smax = std::max(smax, size[static_cast<std::size_t>(p)]);
    if (arg < 0 || worst[static_cast<std::size_t>(p)] > rep.max_abs_tensor) {
      rep.max_abs_tensor = worst[static_cast<std::size_t>(p)];
      arg = p;
    }
  }
  rep.scale = 1.0 + smax * smax;
  rep.involutive = rep.max_abs_tensor <= 1e-6 * rep.scale;
  if (arg >= 0) rep.worst_point = points[static_cast<std::size_t>(arg)];
  return rep;
}

}  // namespace dirac
