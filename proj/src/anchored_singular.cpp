#include "dirac/anchored_singular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dirac {

AnchoredBundle::AnchoredBundle(int n, int k, AnchorFn rho, Box domain)
    : n_(n), k_(k), rho_(std::move(rho)), domain_(std::move(domain)) {
  if (n < 1 || k < 1) throw DimensionError("AnchoredBundle: base and fibre dimensions must be at least 1");
  if (domain_.bounded() && domain_.lo.size() != n) throw DimensionError("AnchoredBundle: domain box dimension");
}

AnchoredBundle& AnchoredBundle::with_derivative(AnchorDerivativeFn drho) {
  drho_ = std::move(drho);
  return *this;
}

AnchoredBundle& AnchoredBundle::with_cone(ConePredicate cone) {
  cone_ = std::move(cone);
  return *this;
}

bool AnchoredBundle::in_domain(const Vec& x) const {
  return x.size() == n_ && domain_.contains(x);
}

Mat AnchoredBundle::anchor(const Vec& x) const {
  require_size(x, n_, "anchor point");
  if (!domain_.contains(x)) throw DomainError("AnchoredBundle: point outside domain");
  Mat r = rho_(x);
  if (r.rows() != n_ || r.cols() != k_) throw DimensionError("AnchoredBundle: anchor has wrong shape");
  return r;
}

std::vector<Mat> AnchoredBundle::anchor_derivative(const Vec& x) const {
  require_size(x, n_, "anchor point");
  if (!domain_.contains(x)) throw DomainError("AnchoredBundle: point outside domain");
  if (drho_) {
    std::vector<Mat> d = drho_(x);
    if (static_cast<int>(d.size()) != n_) throw DimensionError("AnchoredBundle: derivative list length");
    return d;
  }
  std::vector<Mat> d(static_cast<std::size_t>(n_));
  Vec xp = x;
  for (int i = 0; i < n_; ++i) {
    const double h = domain_.fit_step(x, i, first_derivative_step(x[i]));
    xp[i] = x[i] + h;
    const Mat rp = rho_(xp);
    xp[i] = x[i] - h;
    const Mat rm = rho_(xp);
    xp[i] = x[i];
    d[static_cast<std::size_t>(i)] = (rp - rm) / (2.0 * h);
  }
  return d;
}

int AnchoredBundle::validate(std::mt19937_64& rng, int probes, int declared_rank,
                             double radius) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int j = 0; j < probes; ++j) {
    Vec x(n_);
    for (int i = 0; i < n_; ++i) {
      x[i] = domain_.bounded()
                 ? 0.5 * (domain_.lo[i] + domain_.hi[i]) + 0.45 * (domain_.hi[i] - domain_.lo[i]) * unit(rng)
                 : radius * unit(rng);
    }
    const Mat r = anchor(x);
    Eigen::JacobiSVD<Mat> svd(r);
    const Vec& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] >= 1e-8 * s[0] && s[i] > 0.0) ++rank;
    }
    if (rank != declared_rank) throw InvariantError("AnchoredBundle: anchor rank differs from the declared rank");
    Vec u(k_);
    for (int i = 0; i < k_; ++i) u[i] = unit(rng);
    if (in_cone(u) && !in_cone(scale(rng) * u)) throw InvariantError("AnchoredBundle: fibre domain is not a cone");
  }
  return declared_rank;
}

SingularLagrangian::SingularLagrangian(AnchoredBundle bundle, FibreLagrangianFn L)
    : bundle_(std::move(bundle)), L_(std::move(L)) {}

SingularLagrangian SingularLagrangian::quadratic(AnchoredBundle bundle, const Mat& metric) {
  const int k = bundle.k();
  if (metric.rows() != k || metric.cols() != k) throw DimensionError("SingularLagrangian::quadratic: metric size");
  Eigen::LLT<Mat> llt(metric);
  if (llt.info() != Eigen::Success || (metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * metric.cwiseAbs().maxCoeff()) {
    throw InvariantError("SingularLagrangian::quadratic: metric must be symmetric positive definite");
  }
  const int n = bundle.n();
  SingularLagrangian sl(std::move(bundle),
                        [metric](const Vec&, const Vec& u) { return 0.5 * u.dot(metric * u); });
  sl.with_du([metric](const Vec&, const Vec& u) -> Vec { return metric * u; })
      .with_duu([metric](const Vec&, const Vec&) -> Mat { return metric; })
      .with_dx([n](const Vec&, const Vec&) -> Vec { return Vec::Zero(n); });
  return sl;
}

SingularLagrangian& SingularLagrangian::with_du(FibreGradFn f) {
  du_ = std::move(f);
  return *this;
}
SingularLagrangian& SingularLagrangian::with_duu(FibreHessFn f) {
  duu_ = std::move(f);
  return *this;
}
SingularLagrangian& SingularLagrangian::with_dx(FibreGradFn f) {
  dx_ = std::move(f);
  return *this;
}

void SingularLagrangian::check(const Vec& x, const Vec& u) const {
  require_size(x, bundle_.n(), "fibre Lagrangian base point");
  require_size(u, bundle_.k(), "fibre Lagrangian fibre vector");
  if (!bundle_.in_domain(x)) throw DomainError("SingularLagrangian: base point outside domain");
  if (!bundle_.in_cone(u)) throw DomainError("SingularLagrangian: fibre vector outside the conic domain");
}

double SingularLagrangian::value(const Vec& x, const Vec& u) const {
  check(x, u);
  return L_(x, u);
}

Vec SingularLagrangian::du(const Vec& x, const Vec& u) const {
  check(x, u);
  if (du_) return du_(x, u);
  return gradient_fd([&](const Vec& w) { return L_(x, w); }, u);
}

Mat SingularLagrangian::duu(const Vec& x, const Vec& u) const {
  check(x, u);
  if (duu_) return duu_(x, u);
  if (du_) return jacobian_fd([&](const Vec& w) { return du_(x, w); }, u);
  const int k = bundle_.k();
  Mat h(k, k);
  Vec w = u;
  for (int i = 0; i < k; ++i) {
    const double hi = second_derivative_step(std::abs(u[i]));
    for (int j = 0; j < k; ++j) {
      const double hj = second_derivative_step(std::abs(u[j]));
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          w = u;
          w[i] += si * hi;
          w[j] += sj * hj;
          acc += si * sj * L_(x, w);
        }
      }
      h(i, j) = acc / (4.0 * hi * hj);
    }
  }
  return 0.5 * (h + h.transpose());
}

Vec SingularLagrangian::dx(const Vec& x, const Vec& u) const {
  check(x, u);
  if (dx_) return dx_(x, u);
  return gradient_fd([&](const Vec& y) { return L_(y, u); }, x, bundle_.domain());
}

SingularLagrangian SingularLagrangian::reparametrized(const Mat& s) const {
  const int k = bundle_.k();
  if (s.rows() != k || s.cols() != k) throw DimensionError("reparametrized: basis change must be k x k");
  if (Eigen::FullPivLU<Mat>(s).rank() < k) throw InvariantError("reparametrized: basis change must be invertible");
  const AnchoredBundle& b = bundle_;
  AnchoredBundle nb(b.n(), k, [b, s](const Vec& x) -> Mat { return b.anchor(x) * s; }, b.domain());
  nb.with_derivative([b, s](const Vec& x) {
      std::vector<Mat> d = b.anchor_derivative(x);
      for (Mat& m : d) m = m * s;
      return d;
    })
      .with_cone([b, s](const Vec& w) { return b.in_cone(s * w); });
  const SingularLagrangian self = *this;
  SingularLagrangian out(std::move(nb), [self, s](const Vec& x, const Vec& w) { return self.value(x, s * w); });
  out.with_du([self, s](const Vec& x, const Vec& w) -> Vec { return s.transpose() * self.du(x, s * w); })
      .with_duu([self, s](const Vec& x, const Vec& w) -> Mat {
        return s.transpose() * self.duu(x, s * w) * s;
      })
      .with_dx([self, s](const Vec& x, const Vec& w) -> Vec { return self.dx(x, s * w); });
  return out;
}

void SingularLagrangian::validate(std::mt19937_64& rng, int probes, double radius) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Box& dom = bundle_.domain();
  for (int j = 0; j < probes; ++j) {
    Vec x(bundle_.n());
    for (int i = 0; i < bundle_.n(); ++i) {
      x[i] = dom.bounded() ? 0.5 * (dom.lo[i] + dom.hi[i]) + 0.45 * (dom.hi[i] - dom.lo[i]) * unit(rng)
                           : radius * unit(rng);
    }
    Vec u(bundle_.k());
    for (int i = 0; i < bundle_.k(); ++i) u[i] = unit(rng);
    if (!bundle_.in_cone(u)) continue;
    Eigen::JacobiSVD<Mat> svd(duu(x, u));
    const Vec& s = svd.singularValues();
    if (!(s[s.size() - 1] > 1e-8 * s[0])) throw InvariantError("SingularLagrangian: fibre Hessian is degenerate");
  }
}

double control_hamiltonian(const SingularLagrangian& sl, const Vec& x, const Vec& u, const Vec& p,
                           double nu) {
  const AnchoredBundle& b = sl.bundle();
  require_size(p, b.n(), "control_hamiltonian covector");
  require_size(u, b.k(), "control_hamiltonian control");
  const double pairing_term = p.dot(b.anchor(x) * u);
  if (nu == 0.0) return pairing_term;
  return pairing_term - nu * sl.value(x, u);
}

Vec fibre_stationarity_solve(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                             const Vec& u_guess, const NewtonOptions& opts) {
  const AnchoredBundle& b = sl.bundle();
  require_size(p, b.n(), "fibre_stationarity_solve covector");
  const Vec target = b.anchor(x).transpose() * p;
  Vec guess = u_guess.size() == b.k() ? u_guess : target;
  if (!b.in_cone(guess)) throw DomainError("fibre_stationarity_solve: guess outside the conic domain");
  bool left_cone = false;
  const auto residual = [&](const Vec& u) -> Vec {
    if (!b.in_cone(u)) {
      left_cone = true;
      return Vec::Constant(u.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return sl.du(x, u) - target;
  };
  const auto jac = [&](const Vec& u) -> Mat { return sl.duu(x, u); };
  NewtonResult r;
  try {
    r = newton_solve(residual, guess, opts, jac);
  } catch (const SolverError& e) {
    if (left_cone) throw DomainError(std::string("fibre_stationarity_solve: stationary point outside the conic domain (") + e.what() + ")");
    throw;
  }
  if (!b.in_cone(r.z)) throw DomainError("fibre_stationarity_solve: solution left the conic domain");
  return r.z;
}

double reduced_hamiltonian(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                           const Vec& u_guess) {
  const Vec u = fibre_stationarity_solve(sl, x, p, u_guess);
  return control_hamiltonian(sl, x, u, p, 1.0);
}

PhaseVelocity hamiltonian_vector_field(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                                       const Vec& u_guess) {
  const AnchoredBundle& b = sl.bundle();
  PhaseVelocity out;
  out.u = fibre_stationarity_solve(sl, x, p, u_guess);
  out.xdot = b.anchor(x) * out.u;
  const std::vector<Mat> d = b.anchor_derivative(x);
  const Vec lx = sl.dx(x, out.u);
  out.pdot.resize(b.n());
  for (int i = 0; i < b.n(); ++i) {
    out.pdot[i] = -(p.dot(d[static_cast<std::size_t>(i)] * out.u) - lx[i]);
  }
  return out;
}

namespace {

struct Rk4Stepper {
  const SingularLagrangian& sl;
  const FlowOptions& opts;

  PhaseVelocity field(const Vec& x, const Vec& p, const Vec& guess) const {
    return hamiltonian_vector_field(sl, x, p, guess);
  }

  // Advances (x, p) by h; returns the stationary u at the start point.
  Vec step(Vec& x, Vec& p, double h, const Vec& guess) const {
    const PhaseVelocity k1 = field(x, p, guess);
    const PhaseVelocity k2 = field(x + 0.5 * h * k1.xdot, p + 0.5 * h * k1.pdot, k1.u);
    const PhaseVelocity k3 = field(x + 0.5 * h * k2.xdot, p + 0.5 * h * k2.pdot, k2.u);
    const PhaseVelocity k4 = field(x + h * k3.xdot, p + h * k3.pdot, k3.u);
    x += h / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
    p += h / 6.0 * (k1.pdot + 2.0 * k2.pdot + 2.0 * k3.pdot + k4.pdot);
    return k4.u;
  }

  void check_blowup(const Vec& x, const Vec& p, double t) const {
    if (!x.allFinite() || !p.allFinite() || inf_norm(x) > opts.blowup || inf_norm(p) > opts.blowup) {
      std::ostringstream os;
      os << "normal extremal blow-up at t = " << t;
      throw SolverError(os.str());
    }
  }
};

[[noreturn]] void rethrow_domain_exit(const DomainError& e, double t, const Vec& x) {
  std::ostringstream os;
  os << "conic domain exit at t = " << t << ", x = (";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "): " << e.what();
  throw DomainError(os.str());
}

}  // namespace

Trajectory integrate_normal_extremal(const SingularLagrangian& sl, const Vec& x0, const Vec& p0,
                                     double T, double dt, const FlowOptions& opts) {
  const AnchoredBundle& b = sl.bundle();
  require_size(x0, b.n(), "initial point");
  require_size(p0, b.n(), "initial covector");
  if (!(inf_norm(p0) > 0.0)) throw ArgumentError("integrate_normal_extremal: p0 must be nonzero");
  if (!b.in_domain(x0)) throw DomainError("integrate_normal_extremal: x0 outside domain");
  const int steps = step_count(T, dt);
  const double h = T / steps;

  Trajectory traj;
  traj.kind = TrajectoryKind::kNormalExtremal;
  traj.n = b.n();
  traj.k = 0;
  traj.fibre_dim = b.k();
  const Rk4Stepper rk{sl, opts};

  Vec x = x0;
  Vec p = p0;
  Vec guess;
  const auto record = [&](double t) {
    Vec u;
    try {
      u = fibre_stationarity_solve(sl, x, p, guess, opts.newton);
    } catch (const DomainError& e) {
      rethrow_domain_exit(e, t, x);
    }
    MechState s;
    s.t = t;
    s.x = x;
    s.v = b.anchor(x) * u;
    s.p = p;
    s.lambda.resize(0);
    traj.states.push_back(s);
    traj.controls.push_back(u);
    traj.energy.push_back(control_hamiltonian(sl, x, u, p, 1.0));
    traj.constraint_residual.push_back(inf_norm(sl.du(x, u) - b.anchor(x).transpose() * p));
    guess = u;
  };
  record(0.0);
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    try {
      rk.step(x, p, h, guess);
    } catch (const DomainError& e) {
      rethrow_domain_exit(e, t, x);
    }
    rk.check_blowup(x, p, t + h);
    record((i + 1) * h);
  }
  traj.normal = inf_norm(p) > 1e-10;
  return traj;
}

PhasePoint flow_normal_extremal(const SingularLagrangian& sl, const Vec& x0, const Vec& p0,
                                double duration, double dt, const FlowOptions& opts) {
  const AnchoredBundle& b = sl.bundle();
  require_size(x0, b.n(), "initial point");
  require_size(p0, b.n(), "initial covector");
  if (duration == 0.0) return {x0, p0};
  const int steps = step_count(std::abs(duration), dt);
  const double h = duration / steps;
  const Rk4Stepper rk{sl, opts};
  Vec x = x0;
  Vec p = p0;
  Vec guess;
  for (int i = 0; i < steps; ++i) {
    guess = rk.step(x, p, h, guess);
    rk.check_blowup(x, p, (i + 1) * h);
  }
  return {x, p};
}

std::vector<PontryaginRows> pontryagin_residual(const SingularLagrangian& sl,
                                                const Trajectory& traj, double nu) {
  const AnchoredBundle& b = sl.bundle();
  const std::size_t n = traj.states.size();
  if (traj.controls.size() != n) throw ArgumentError("pontryagin_residual: trajectory lacks recorded controls");
  std::vector<double> t(n);
  std::vector<Vec> xs(n), ps(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.states[i].t;
    xs[i] = traj.states[i].x;
    ps[i] = traj.states[i].p;
  }
  const std::vector<Vec> xdot = differentiate_samples(t, xs);
  const std::vector<Vec> pdot = differentiate_samples(t, ps);
  std::vector<PontryaginRows> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& x = xs[i];
    const Vec& p = ps[i];
    const Vec& u = traj.controls[i];
    const Mat r = b.anchor(x);
    const std::vector<Mat> d = b.anchor_derivative(x);
    Vec hx(b.n());
    for (int j = 0; j < b.n(); ++j) hx[j] = p.dot(d[static_cast<std::size_t>(j)] * u);
    Vec hu = r.transpose() * p;
    if (nu != 0.0) {
      hx -= nu * sl.dx(x, u);
      hu -= nu * sl.du(x, u);
    }
    rows[i].state = inf_norm(xdot[i] - r * u);
    rows[i].costate = inf_norm(pdot[i] + hx);
    rows[i].stationarity = inf_norm(hu);
  }
  return rows;
}

}  // namespace dirac
