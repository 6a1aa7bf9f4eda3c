#include "dirac/conic_finsler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dirac {

ConicMinkowskiNorm::ConicMinkowskiNorm(int k, FibreScalarFn F, ConePredicate domain)
    : k_(k), F_(std::move(F)), domain_(std::move(domain)) {
  if (k < 1) throw DimensionError("ConicMinkowskiNorm: fibre dimension must be at least 1");
}

ConicMinkowskiNorm& ConicMinkowskiNorm::with_gradient(FibreVectorFn f) {
  grad_ = std::move(f);
  return *this;
}

ConicMinkowskiNorm& ConicMinkowskiNorm::with_hessian(FibreMatrixFn f) {
  hess_ = std::move(f);
  return *this;
}

bool ConicMinkowskiNorm::in_domain(const Vec& u) const {
  if (u.size() != k_ || !u.allFinite()) return false;
  if (!(u.cwiseAbs().maxCoeff() > 0.0)) return false;
  return !domain_ || domain_(u);
}

void ConicMinkowskiNorm::check(const Vec& u) const {
  require_size(u, k_, "fibre vector");
  if (!in_domain(u)) throw DomainError("ConicMinkowskiNorm: vector outside the conic domain");
}

double ConicMinkowskiNorm::value(const Vec& u) const {
  check(u);
  return F_(u);
}

Vec ConicMinkowskiNorm::half_square_gradient(const Vec& u) const {
  check(u);
  if (grad_) return grad_(u);
  Vec g(k_);
  Vec w = u;
  for (int i = 0; i < k_; ++i) {
    double h = first_derivative_step(u[i]);
    for (int tries = 0;; ++tries) {
      w[i] = u[i] + h;
      const bool up = in_domain(w);
      w[i] = u[i] - h;
      if (up && in_domain(w)) break;
      if (tries > 40) throw DomainError("ConicMinkowskiNorm: gradient stencil leaves the domain");
      h *= 0.5;
    }
    w[i] = u[i] + h;
    const double fp = F_(w);
    w[i] = u[i] - h;
    const double fm = F_(w);
    w[i] = u[i];
    g[i] = (fp * fp - fm * fm) / (4.0 * h);
  }
  return g;
}

Mat ConicMinkowskiNorm::hessian(const Vec& u) const {
  check(u);
  if (hess_) return hess_(u);
  Mat h(k_, k_);
  for (int i = 0; i < k_; ++i) {
    for (int j = i; j < k_; ++j) {
      h(i, j) = hessian_g_fd(*this, u, Vec::Unit(k_, i), Vec::Unit(k_, j));
      h(j, i) = h(i, j);
    }
  }
  return h;
}

double hessian_g_fd(const ConicMinkowskiNorm& norm, const Vec& base, const Vec& v, const Vec& w) {
  require_size(v, norm.dim(), "hessian_g direction");
  require_size(w, norm.dim(), "hessian_g direction");
  if (!norm.in_domain(base)) throw DomainError("hessian_g: base vector outside the conic domain");
  const double nv = v.norm();
  const double nw = w.norm();
  if (nv == 0.0 || nw == 0.0) return 0.0;
  const Vec a = v / nv;
  const Vec b = w / nw;
  // g is invariant under positive scaling of u; work at unit length.
  const Vec u = base / base.norm();
  double h = std::pow(kEps, 0.25) * std::max(1.0, u.norm());
  const auto stencil_ok = [&](double s) {
    for (int si : {1, -1}) {
      for (int sj : {1, -1}) {
        if (!norm.in_domain(u + si * s * a + sj * s * b)) return false;
      }
    }
    return true;
  };
  int tries = 0;
  while (!stencil_ok(h)) {
    if (++tries > 40) throw DomainError("hessian_g: difference stencil leaves the conic domain");
    h *= 0.5;
  }
  const auto q = [&](const Vec& z) {
    const double f = norm.value(z);
    return 0.5 * f * f;
  };
  const double mixed = q(u + h * a + h * b) - q(u + h * a - h * b) - q(u - h * a + h * b) +
                       q(u - h * a - h * b);
  return mixed / (4.0 * h * h) * nv * nw;
}

double hessian_g(const ConicMinkowskiNorm& norm, const Vec& u, const Vec& v, const Vec& w) {
  require_size(v, norm.dim(), "hessian_g direction");
  require_size(w, norm.dim(), "hessian_g direction");
  if (norm.has_hessian()) return v.dot(norm.hessian(u) * w);
  return hessian_g_fd(norm, u, v, w);
}

ConicMinkowskiNorm euclidean_norm(int k) {
  ConicMinkowskiNorm norm(k, [](const Vec& u) { return u.norm(); });
  norm.with_gradient([](const Vec& u) -> Vec { return u; })
      .with_hessian([k](const Vec&) -> Mat { return Mat::Identity(k, k); });
  return norm;
}

ConicMinkowskiNorm randers_norm(const Mat& metric, const Vec& xi) {
  const auto k = static_cast<int>(metric.rows());
  if (metric.cols() != k || xi.size() != k) throw DimensionError("randers_norm: metric and wind sizes");
  Eigen::LLT<Mat> llt(metric);
  const double asym = (metric - metric.transpose()).cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || asym > 1e-12 * metric.cwiseAbs().maxCoeff()) {
    throw InvariantError("randers_norm: metric must be symmetric positive definite");
  }
  const double dual = std::sqrt(xi.dot(llt.solve(xi)));
  if (!(dual < 1.0)) throw InvariantError("randers_norm: wind must have dual norm below 1");
  ConicMinkowskiNorm norm(k, [metric, xi](const Vec& u) { return std::sqrt(u.dot(metric * u)) + xi.dot(u); });
  norm.with_gradient([metric, xi](const Vec& u) -> Vec {
        const Vec gu = metric * u;
        const double a = std::sqrt(u.dot(gu));
        const double f = a + xi.dot(u);
        return f * (gu / a + xi);
      })
      .with_hessian([metric, xi](const Vec& u) -> Mat {
        const Vec gu = metric * u;
        const double a = std::sqrt(u.dot(gu));
        const double f = a + xi.dot(u);
        const Vec df = gu / a + xi;
        return df * df.transpose() + f * (metric / a - gu * gu.transpose() / (a * a * a));
      });
  return norm;
}

double MinkowskiProbeReport::worst() const {
  return std::max({homogeneity, hessian_scaling, hessian_diagonal, polarization});
}

bool MinkowskiProbeReport::pass(double tol) const {
  return min_positivity > 0.0 && min_eigenvalue > 0.0 && worst() <= tol;
}

namespace {

struct MinkowskiSample {
  Vec u;
  Vec w;
  double lambda = 1.0;
};

struct MinkowskiRow {
  double positivity = 0.0;
  double homogeneity = 0.0;
  double scaling = 0.0;
  double diagonal = 0.0;
  double polarization = 0.0;
  double eigen = 0.0;
};

// 1/2 d/ds F^2(u + s w) at s = 0, Richardson-extrapolated central differences.
double half_square_slope(const ConicMinkowskiNorm& norm, const Vec& u, const Vec& w) {
  double h = 1e-3 * u.norm() / w.norm();
  int tries = 0;
  while (!norm.in_domain(u + h * w) || !norm.in_domain(u - h * w)) {
    if (++tries > 40) throw DomainError("minkowski probe: slope stencil leaves the domain");
    h *= 0.5;
  }
  const auto central = [&](double s) {
    const double fp = norm.value(u + s * w);
    const double fm = norm.value(u - s * w);
    return (fp * fp - fm * fm) / (4.0 * s);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

MinkowskiRow probe_row(const ConicMinkowskiNorm& norm, const MinkowskiSample& s) {
  MinkowskiRow r;
  const double f = norm.value(s.u);
  r.positivity = f / s.u.norm();
  const double fl = norm.value(s.lambda * s.u);
  r.homogeneity = std::abs(fl - s.lambda * f) / (s.lambda * f);
  const Mat g = norm.hessian(s.u);
  const Mat gl = norm.hessian(s.lambda * s.u);
  const double gscale = g.cwiseAbs().maxCoeff();
  r.scaling = (gl - g).cwiseAbs().maxCoeff() / gscale;
  const double guu = hessian_g(norm, s.u, s.u, s.u);
  r.diagonal = std::abs(guu - f * f) / (f * f);
  const double guw = hessian_g(norm, s.u, s.u, s.w);
  const double gww = hessian_g(norm, s.u, s.w, s.w);
  const double slope = half_square_slope(norm, s.u, s.w);
  r.polarization = std::abs(guw - slope) / std::sqrt(std::abs(guu * gww));
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  const Vec& ev = eig.eigenvalues();
  r.eigen = ev[0] / std::max(std::abs(ev[ev.size() - 1]), 1e-300);
  return r;
}

}  // namespace

MinkowskiProbeReport minkowski_property_probe(const ConicMinkowskiNorm& norm, int probes,
                                              std::uint64_t seed, Execution exec) {
  if (probes < 1) throw ArgumentError("minkowski_property_probe: probe count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int k = norm.dim();
  std::vector<MinkowskiSample> samples(static_cast<std::size_t>(probes));
  for (auto& s : samples) {
    int attempts = 0;
    do {
      if (++attempts > 1000) throw DomainError("minkowski_property_probe: cannot sample the conic domain");
      s.u.resize(k);
      for (int i = 0; i < k; ++i) s.u[i] = unit(rng);
      s.u *= std::pow(10.0, unit(rng));
    } while (!norm.in_domain(s.u));
    s.w.resize(k);
    for (int i = 0; i < k; ++i) s.w[i] = unit(rng);
    if (s.w.norm() < 1e-3) s.w = s.u;
    s.lambda = std::pow(10.0, unit(rng));
  }

  std::vector<MinkowskiRow> rows(samples.size());
  for_each_index(exec, probes, [&](int i) {
    rows[static_cast<std::size_t>(i)] = probe_row(norm, samples[static_cast<std::size_t>(i)]);
  });

  MinkowskiProbeReport rep;
  rep.probes = probes;
  rep.min_positivity = rows.front().positivity;
  rep.min_eigenvalue = rows.front().eigen;
  for (const MinkowskiRow& r : rows) {
    rep.min_positivity = std::min(rep.min_positivity, r.positivity);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, r.eigen);
    rep.homogeneity = std::max(rep.homogeneity, r.homogeneity);
    rep.hessian_scaling = std::max(rep.hessian_scaling, r.scaling);
    rep.hessian_diagonal = std::max(rep.hessian_diagonal, r.diagonal);
    rep.polarization = std::max(rep.polarization, r.polarization);
  }
  return rep;
}

ConicFinslerStructure::ConicFinslerStructure(AnchoredBundle bundle, NormFieldFn norm_at)
    : bundle_(std::move(bundle)), norm_at_(std::move(norm_at)) {}

ConicFinslerStructure ConicFinslerStructure::riemannian(AnchoredBundle bundle, const Mat& metric) {
  const ConicMinkowskiNorm norm = randers_norm(metric, Vec::Zero(metric.rows()));
  if (metric.rows() != bundle.k()) throw DimensionError("riemannian: metric size differs from the fibre dimension");
  ConicFinslerStructure fs(std::move(bundle), [norm](const Vec&) { return norm; });
  const int n = fs.bundle().n();
  fs.with_dx([n](const Vec&, const Vec&) -> Vec { return Vec::Zero(n); });
  return fs;
}

ConicFinslerStructure& ConicFinslerStructure::with_dx(HalfSquareDxFn f) {
  dx_ = std::move(f);
  return *this;
}

ConicMinkowskiNorm ConicFinslerStructure::norm_at(const Vec& x) const {
  require_size(x, bundle_.n(), "Finsler base point");
  if (!bundle_.in_domain(x)) throw DomainError("ConicFinslerStructure: base point outside domain");
  ConicMinkowskiNorm norm = norm_at_(x);
  if (norm.dim() != bundle_.k()) throw DimensionError("ConicFinslerStructure: norm dimension differs from the fibre");
  return norm;
}

double ConicFinslerStructure::F(const Vec& x, const Vec& u) const {
  if (!bundle_.in_cone(u)) throw DomainError("ConicFinslerStructure: fibre vector outside the cone");
  return norm_at(x).value(u);
}

SingularLagrangian ConicFinslerStructure::lagrangian() const {
  const ConicFinslerStructure self = *this;
  AnchoredBundle b = bundle_;
  const AnchoredBundle base = bundle_;
  b.with_cone([base](const Vec& u) { return base.in_cone(u) && u.cwiseAbs().maxCoeff() > 0.0; });
  SingularLagrangian sl(std::move(b), [self](const Vec& x, const Vec& u) {
    const double f = self.F(x, u);
    return 0.5 * f * f;
  });
  sl.with_du([self](const Vec& x, const Vec& u) { return self.norm_at(x).half_square_gradient(u); })
      .with_duu([self](const Vec& x, const Vec& u) { return self.norm_at(x).hessian(u); })
      .with_dx([self](const Vec& x, const Vec& u) -> Vec {
        if (self.dx_) return self.dx_(x, u);
        return gradient_fd(
            [&](const Vec& y) {
              const double f = self.F(y, u);
              return 0.5 * f * f;
            },
            x, self.bundle_.domain());
      });
  return sl;
}

MinkowskiProbeReport ConicFinslerStructure::validate(std::uint64_t seed, int base_probes,
                                                     int fibre_probes, double radius) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Box& dom = bundle_.domain();
  MinkowskiProbeReport worst;
  bool first = true;
  for (int j = 0; j < base_probes; ++j) {
    Vec x(bundle_.n());
    for (int i = 0; i < bundle_.n(); ++i) {
      x[i] = dom.bounded() ? 0.5 * (dom.lo[i] + dom.hi[i]) + 0.45 * (dom.hi[i] - dom.lo[i]) * unit(rng)
                           : radius * unit(rng);
    }
    const ConicMinkowskiNorm norm = norm_at(x);
    const MinkowskiProbeReport rep = minkowski_property_probe(norm, fibre_probes, rng());
    if (!rep.pass(1e-6)) throw InvariantError("ConicFinslerStructure: fibre norm fails the Minkowski invariants");
    if (first || rep.worst() > worst.worst()) worst = rep;
    first = false;

    Vec u(bundle_.k());
    do {
      for (int i = 0; i < bundle_.k(); ++i) u[i] = unit(rng);
    } while (!norm.in_domain(u) || !bundle_.in_cone(u));
    const double f0 = norm.value(u);
    for (int i = 0; i < bundle_.n(); ++i) {
      Vec y = x;
      y[i] += dom.fit_step(x, i, 1e-7 * std::max(1.0, std::abs(x[i])));
      const double f1 = norm_at(y).value(u);
      if (!std::isfinite(f1) || std::abs(f1 - f0) > 1e-4 * (1.0 + f0)) {
        throw InvariantError("ConicFinslerStructure: norm field is not continuous in x");
      }
    }
  }
  return worst;
}

namespace {

void check_lift(const ConicFinslerStructure& fs, const Lift& lift) {
  const std::size_t n = lift.t.size();
  if (n < 2 || lift.x.size() != n || lift.u.size() != n) {
    throw ArgumentError("lift: t, x and u must have the same length of at least 2");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(lift.t[i] > lift.t[i - 1])) throw ArgumentError("lift: times must increase");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_size(lift.x[i], fs.bundle().n(), "lift base sample");
    require_size(lift.u[i], fs.bundle().k(), "lift fibre sample");
  }
}

std::vector<double> lift_speeds(const ConicFinslerStructure& fs, const Lift& lift) {
  std::vector<double> f(lift.t.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fs.F(lift.x[i], lift.u[i]);
  return f;
}

Vec hermite(const Vec& a, const Vec& b, const Vec& da, const Vec& db, double th) {
  const double th2 = th * th;
  const double th3 = th2 * th;
  return (2 * th3 - 3 * th2 + 1) * a + (th3 - 2 * th2 + th) * da + (-2 * th3 + 3 * th2) * b +
         (th3 - th2) * db;
}

double hermite(double a, double b, double da, double db, double th) {
  const double th2 = th * th;
  const double th3 = th2 * th;
  return (2 * th3 - 3 * th2 + 1) * a + (th3 - 2 * th2 + th) * da + (-2 * th3 + 3 * th2) * b +
         (th3 - th2) * db;
}

}  // namespace

double energy_of_lift(const ConicFinslerStructure& fs, const Lift& lift) {
  check_lift(fs, lift);
  std::vector<double> f = lift_speeds(fs, lift);
  for (double& v : f) v = 0.5 * v * v;
  return simpson(lift.t, f);
}

double length_of_lift(const ConicFinslerStructure& fs, const Lift& lift) {
  check_lift(fs, lift);
  return simpson(lift.t, lift_speeds(fs, lift));
}

Lift constant_speed_reparametrize(const ConicFinslerStructure& fs, const Lift& lift) {
  check_lift(fs, lift);
  const std::size_t n = lift.t.size();
  if (n < 3) throw ArgumentError("constant_speed_reparametrize: needs at least 3 samples");
  const std::vector<double> f = lift_speeds(fs, lift);
  for (double v : f) {
    if (!(v > 0.0)) throw DomainError("constant_speed_reparametrize: vanishing speed along the lift");
  }
  std::vector<Vec> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = Vec::Constant(1, f[i]);
  const std::vector<Vec> df = differentiate_samples(lift.t, fv);
  const std::vector<Vec> du = differentiate_samples(lift.t, lift.u);
  std::vector<Vec> dx(n);
  for (std::size_t i = 0; i < n; ++i) dx[i] = fs.bundle().anchor(lift.x[i]) * lift.u[i];

  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = lift.t[i + 1] - lift.t[i];
    s[i + 1] = s[i] + 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i][0] - df[i + 1][0]);
  }
  const double total = s.back();
  const double t0 = lift.t.front();
  const double duration = lift.t.back() - t0;
  const double speed = total / duration;

  Lift out;
  out.t.resize(n);
  out.x.resize(n);
  out.u.resize(n);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double frac = static_cast<double>(j) / static_cast<double>(n - 1);
    out.t[j] = j + 1 == n ? lift.t.back() : t0 + frac * duration;
    const double target = j + 1 == n ? total : frac * total;
    while (seg + 2 < n && s[seg + 1] < target) ++seg;
    const double h = lift.t[seg + 1] - lift.t[seg];
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hermite(s[seg], s[seg + 1], h * f[seg], h * f[seg + 1], mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double th = 0.5 * (lo + hi);
    out.x[j] = hermite(lift.x[seg], lift.x[seg + 1], h * dx[seg], h * dx[seg + 1], th);
    const Vec u = hermite(lift.u[seg], lift.u[seg + 1], h * du[seg], h * du[seg + 1], th);
    out.u[j] = u * (speed / fs.F(out.x[j], u));
  }
  return out;
}

Trajectory normal_geodesic(const ConicFinslerStructure& fs, const Vec& x0, const Vec& p0, double T,
                           double dt, const FlowOptions& opts) {
  return integrate_normal_extremal(fs.lagrangian(), x0, p0, T, dt, opts);
}

}  // namespace dirac
