#include "dirac/implicit_mechanics.hpp"

#include <algorithm>
#include <cmath>

namespace dirac {

LagrangianModel::LagrangianModel(int n, LagrangianFn L, Box domain)
    : n_(n), L_(std::move(L)), domain_(std::move(domain)) {
  if (n < 1) throw DimensionError("LagrangianModel: dimension must be at least 1");
  if (domain_.bounded() && domain_.lo.size() != n) throw DimensionError("LagrangianModel: domain box dimension");
}

LagrangianModel LagrangianModel::quadratic(const Mat& mass, const Mat& stiffness) {
  if (mass.rows() != mass.cols() || stiffness.rows() != stiffness.cols() ||
      mass.rows() != stiffness.rows()) {
    throw DimensionError("LagrangianModel::quadratic: mass and stiffness must be square and equal size");
  }
  const auto n = static_cast<int>(mass.rows());
  LagrangianModel lm(n, [mass, stiffness](const Vec& x, const Vec& v) {
    return 0.5 * v.dot(mass * v) - 0.5 * x.dot(stiffness * x);
  });
  lm.with_dx([stiffness](const Vec& x, const Vec&) -> Vec { return -(stiffness * x); })
      .with_dv([mass](const Vec&, const Vec& v) -> Vec { return mass * v; })
      .with_dvdv([mass](const Vec&, const Vec&) -> Mat { return mass; })
      .with_dxdv([n](const Vec&, const Vec&) -> Mat { return Mat::Zero(n, n); });
  return lm;
}

LagrangianModel& LagrangianModel::with_dx(LagrangianGradFn f) {
  dx_ = std::move(f);
  return *this;
}
LagrangianModel& LagrangianModel::with_dv(LagrangianGradFn f) {
  dv_ = std::move(f);
  return *this;
}
LagrangianModel& LagrangianModel::with_dvdv(LagrangianHessFn f) {
  dvdv_ = std::move(f);
  return *this;
}
LagrangianModel& LagrangianModel::with_dxdv(LagrangianHessFn f) {
  dxdv_ = std::move(f);
  return *this;
}

void LagrangianModel::check(const Vec& x, const Vec& v) const {
  require_size(x, n_, "Lagrangian configuration");
  require_size(v, n_, "Lagrangian velocity");
  if (!domain_.contains(x)) throw DomainError("LagrangianModel: configuration outside domain");
}

double LagrangianModel::value(const Vec& x, const Vec& v) const {
  check(x, v);
  return L_(x, v);
}

Vec LagrangianModel::dx(const Vec& x, const Vec& v) const {
  check(x, v);
  if (dx_) return dx_(x, v);
  return gradient_fd([&](const Vec& y) { return L_(y, v); }, x, domain_);
}

Vec LagrangianModel::dv(const Vec& x, const Vec& v) const {
  check(x, v);
  if (dv_) return dv_(x, v);
  return gradient_fd([&](const Vec& w) { return L_(x, w); }, v);
}

namespace {

// Central second differences of f with steps eps^(1/4) * max(1, |z_i|).
Mat mixed_second_fd(const std::function<double(const Vec&, const Vec&)>& f, const Vec& a,
                    const Vec& b) {
  Mat h(a.size(), b.size());
  Vec ap = a;
  Vec bp = b;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double hi = second_derivative_step(std::abs(a[i]));
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double hj = second_derivative_step(std::abs(b[j]));
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          ap[i] = a[i] + si * hi;
          bp[j] = b[j] + sj * hj;
          acc += si * sj * f(ap, bp);
        }
      }
      ap[i] = a[i];
      bp[j] = b[j];
      h(i, j) = acc / (4.0 * hi * hj);
    }
  }
  return h;
}

}  // namespace

Mat LagrangianModel::dvdv(const Vec& x, const Vec& v) const {
  check(x, v);
  if (dvdv_) return dvdv_(x, v);
  if (dv_) return jacobian_fd([&](const Vec& w) { return dv_(x, w); }, v);
  // Second differences of L in (v, v'), evaluated at v + s e_i + t e_j.
  Mat h(n_, n_);
  Vec w = v;
  for (int i = 0; i < n_; ++i) {
    const double hi = second_derivative_step(std::abs(v[i]));
    for (int j = 0; j < n_; ++j) {
      const double hj = second_derivative_step(std::abs(v[j]));
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          w = v;
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

Mat LagrangianModel::dxdv(const Vec& x, const Vec& v) const {
  check(x, v);
  if (dxdv_) return dxdv_(x, v);
  if (dv_) return jacobian_fd([&](const Vec& y) { return dv_(y, v); }, x, domain_);
  return mixed_second_fd([&](const Vec& vv, const Vec& xx) { return L_(xx, vv); }, v, x);
}

double LagrangianModel::validate(std::mt19937_64& rng, int probes, double radius) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  auto rel = [](const auto& a, const auto& b) {
    const double s = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / s;
  };
  for (int k = 0; k < probes; ++k) {
    Vec x(n_), v(n_);
    for (int i = 0; i < n_; ++i) {
      x[i] = domain_.bounded()
                 ? 0.5 * (domain_.lo[i] + domain_.hi[i]) + 0.45 * (domain_.hi[i] - domain_.lo[i]) * unit(rng)
                 : radius * unit(rng);
      v[i] = radius * unit(rng);
    }
    if (dx_) worst = std::max(worst, rel(dx_(x, v), gradient_fd([&](const Vec& y) { return L_(y, v); }, x, domain_)));
    if (dv_) worst = std::max(worst, rel(dv_(x, v), gradient_fd([&](const Vec& w) { return L_(x, w); }, v)));
    const auto grad_v = [&](const Vec& y, const Vec& w) -> Vec {
      return dv_ ? dv_(y, w) : gradient_fd([&](const Vec& u) { return L_(y, u); }, w);
    };
    if (dvdv_) worst = std::max(worst, rel(dvdv_(x, v), jacobian_fd([&](const Vec& w) { return grad_v(x, w); }, v)));
    if (dxdv_) worst = std::max(worst, rel(dxdv_(x, v), jacobian_fd([&](const Vec& y) { return grad_v(y, v); }, x, domain_)));
  }
  if (worst > 1e-5) throw InvariantError("LagrangianModel: supplied derivatives disagree with finite differences");
  return worst;
}

Vec legendre(const LagrangianModel& lm, const Vec& x, const Vec& v) { return lm.dv(x, v); }

Vec legendre_inverse(const LagrangianModel& lm, const ConstraintDistribution& cd, const Vec& x,
                     const Vec& p, const Vec& v_guess, const NewtonOptions& opts) {
  const int n = lm.dim();
  if (cd.n() != n) throw DimensionError("legendre_inverse: constraint and Lagrangian dimensions differ");
  require_size(p, n, "legendre_inverse momentum");
  const Mat b = constraint_frame(cd, x).delta;
  const Vec guess = v_guess.size() == n ? v_guess : Vec::Zero(n);
  const auto residual = [&](const Vec& y) -> Vec { return b.transpose() * (lm.dv(x, b * y) - p); };
  const auto jac = [&](const Vec& y) -> Mat { return b.transpose() * lm.dvdv(x, b * y) * b; };
  const NewtonResult r = newton_solve(residual, b.transpose() * guess, opts, jac);
  return b * r.z;
}

Vec legendre_inverse(const LagrangianModel& lm, const Vec& x, const Vec& p, const Vec& v_guess,
                     const NewtonOptions& opts) {
  return legendre_inverse(lm, ConstraintDistribution::unconstrained(lm.dim()), x, p, v_guess, opts);
}

double generalized_energy(const LagrangianModel& lm, const Vec& x, const Vec& v, const Vec& p) {
  require_same_size(v, p, "generalized_energy");
  return p.dot(v) - lm.value(x, v);
}

DiracDifferential dirac_differential(const LagrangianModel& lm, const Vec& x, const Vec& v) {
  return {x, lm.dv(x, v), -lm.dx(x, v), v};
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ArgumentError("horizon and step must be positive");
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

namespace {

void check_system(const LagrangianModel& lm, const ConstraintDistribution& cd) {
  if (lm.dim() != cd.n()) throw DimensionError("Lagrangian and constraint distribution dimensions differ");
}

void record_sample(Trajectory& traj, const LagrangianModel& lm, const ConstraintDistribution& cd,
                   const MechState& s) {
  traj.energy.push_back(generalized_energy(lm, s.x, s.v, s.p));
  const Mat w = cd.omega(s.x);
  traj.constraint_residual.push_back(w.rows() > 0 ? inf_norm(w * s.v) : 0.0);
  traj.legendre_residual.push_back(inf_norm(s.p - lm.dv(s.x, s.v)));
  traj.states.push_back(s);
}

double membership_residual(const MembershipReport& r) {
  return std::max({r.tangent_residual, r.velocity_residual, r.annihilator_residual}) / r.scale;
}

}  // namespace

MechState step_implicit_lagrangian(const LagrangianModel& lm, const ConstraintDistribution& cd,
                                   const MechState& s, double dt, const NewtonOptions& opts,
                                   StepInfo* info) {
  check_system(lm, cd);
  const int n = lm.dim();
  const int k = cd.k();
  require_size(s.x, n, "step state x");
  require_size(s.v, n, "step state v");
  require_size(s.p, n, "step state p");
  if (!(dt > 0.0)) throw ArgumentError("step_implicit_lagrangian: dt must be positive");

  const Vec f0 = lm.dx(s.x, s.v);
  const auto residual = [&](const Vec& z) -> Vec {
    const Vec x1 = z.segment(0, n);
    const Vec v1 = z.segment(n, n);
    const Vec p1 = z.segment(2 * n, n);
    const Vec lam = z.segment(3 * n, k);
    const Vec xm = 0.5 * (s.x + x1);
    Vec r(3 * n + k);
    r.segment(0, n) = x1 - s.x - 0.5 * dt * (s.v + v1);
    Vec force = 0.5 * dt * (f0 + lm.dx(x1, v1));
    if (k > 0) force += dt * (cd.omega(xm).transpose() * lam);
    r.segment(n, n) = p1 - s.p - force;
    r.segment(2 * n, n) = p1 - lm.dv(x1, v1);
    if (k > 0) r.segment(3 * n, k) = cd.omega(x1) * v1;
    return r;
  };

  Vec z0(3 * n + k);
  z0.segment(0, n) = s.x + dt * s.v;
  z0.segment(n, n) = s.v;
  z0.segment(2 * n, n) = s.p;
  z0.segment(3 * n, k) = s.lambda.size() == k ? s.lambda : Vec::Zero(k);
  const NewtonResult r = newton_solve(residual, z0, opts);
  if (info) *info = {r.iterations, r.residual};

  MechState out;
  out.t = s.t + dt;
  out.x = r.z.segment(0, n);
  out.v = r.z.segment(n, n);
  out.p = r.z.segment(2 * n, n);
  out.lambda = r.z.segment(3 * n, k);
  if (k > 0) cd.checked_omega(out.x);
  return out;
}

MembershipReport step_dirac_membership(const LagrangianModel& lm,
                                       const ConstraintDistribution& cd, const MechState& s0,
                                       const MechState& s1, double tol) {
  const double dt = s1.t - s0.t;
  if (!(dt > 0.0)) throw ArgumentError("step_dirac_membership: states must be increasing in time");
  const Vec pdot = (s1.p - s0.p) / dt;
  const MembershipReport at_new =
      induced_dirac_membership(cd, s1.x, s1.p, {s1.v, pdot, -pdot, s1.v}, tol);
  const Vec xm = 0.5 * (s0.x + s1.x);
  const Vec xdot = (s1.x - s0.x) / dt;
  const Vec a = -0.5 * (lm.dx(s0.x, s0.v) + lm.dx(s1.x, s1.v));
  const MembershipReport at_mid =
      induced_dirac_membership(cd, xm, 0.5 * (s0.p + s1.p), {xdot, pdot, a, xdot}, tol);
  MembershipReport rep;
  rep.tangent_residual = at_new.tangent_residual;
  rep.velocity_residual = at_new.velocity_residual;
  rep.annihilator_residual = at_mid.annihilator_residual;
  rep.scale = std::max(at_new.scale, at_mid.scale);
  const double lim = tol * rep.scale;
  rep.member = rep.tangent_residual <= lim && rep.velocity_residual <= lim &&
               rep.annihilator_residual <= lim;
  return rep;
}

Trajectory integrate_implicit_lagrangian(const LagrangianModel& lm,
                                         const ConstraintDistribution& cd, const MechState& init,
                                         double T, double dt, const NewtonOptions& opts) {
  check_system(lm, cd);
  const int n = lm.dim();
  const int k = cd.k();
  require_size(init.x, n, "initial configuration");
  require_size(init.v, n, "initial velocity");
  const int steps = step_count(T, dt);
  const double h = T / steps;

  Trajectory traj;
  traj.n = n;
  traj.k = k;
  MechState s;
  s.t = init.t;
  s.x = init.x;
  s.v = init.v;
  if (k > 0) {
    const Mat w = cd.checked_omega(s.x);
    const double viol = inf_norm(w * s.v);
    const double scale = std::max(1.0, inf_norm(s.v)) * std::max(1.0, w.cwiseAbs().maxCoeff());
    if (viol > 1e-14 * scale) {
      const Mat b = constraint_frame(cd, s.x).delta;
      s.v = b * (b.transpose() * s.v);
      traj.warnings.push_back("initial velocity violated the constraint (residual " +
                              std::to_string(viol) + "); projected onto Delta_x0");
    }
  }
  s.p = lm.dv(s.x, s.v);
  s.lambda = Vec::Zero(k);
  record_sample(traj, lm, cd, s);

  for (int i = 0; i < steps; ++i) {
    MechState next = step_implicit_lagrangian(lm, cd, s, h, opts);
    next.t = init.t + (i + 1) * h;
    traj.dirac_residual.push_back(membership_residual(step_dirac_membership(lm, cd, s, next)));
    record_sample(traj, lm, cd, next);
    s = std::move(next);
  }
  if (traj.states.size() > 1) traj.states[0].lambda = traj.states[1].lambda;
  return traj;
}

double induced_hamiltonian(const LagrangianModel& lm, const ConstraintDistribution& cd,
                           const Vec& x, const Vec& p, const Vec& v_guess) {
  const Vec v = legendre_inverse(lm, cd, x, p, v_guess);
  return generalized_energy(lm, x, v, p);
}

Trajectory integrate_implicit_hamiltonian(const LagrangianModel& lm,
                                          const ConstraintDistribution& cd, const Vec& x0,
                                          const Vec& p0, double T, double dt,
                                          const NewtonOptions& opts, double t0) {
  check_system(lm, cd);
  const int n = lm.dim();
  const int k = cd.k();
  require_size(x0, n, "initial configuration");
  require_size(p0, n, "initial momentum");
  const int steps = step_count(T, dt);
  const double h = T / steps;

  Trajectory traj;
  traj.n = n;
  traj.k = k;
  MechState s;
  s.t = t0;
  s.x = x0;
  s.p = p0;
  s.v = legendre_inverse(lm, cd, x0, p0, Vec::Zero(n), opts);
  if (k > 0) {
    const double off = inf_norm(cd.omega(x0) * (p0 - lm.dv(x0, s.v)));
    if (off > opts.tol * std::max(1.0, inf_norm(p0))) {
      throw ArgumentError("integrate_implicit_hamiltonian: initial momentum is not on the primary constraint");
    }
  }
  s.lambda = Vec::Zero(k);
  record_sample(traj, lm, cd, s);

  for (int i = 0; i < steps; ++i) {
    const Vec f0 = lm.dx(s.x, s.v);
    const Vec guess = s.v;
    const auto velocity = [&](const Vec& x1, const Vec& p1) {
      return legendre_inverse(lm, cd, x1, p1, guess, opts);
    };
    const auto residual = [&](const Vec& z) -> Vec {
      const Vec x1 = z.segment(0, n);
      const Vec p1 = z.segment(n, n);
      const Vec lam = z.segment(2 * n, k);
      const Vec v1 = velocity(x1, p1);
      const Vec xm = 0.5 * (s.x + x1);
      Vec r(2 * n + k);
      r.segment(0, n) = x1 - s.x - 0.5 * h * (s.v + v1);
      Vec force = 0.5 * h * (f0 + lm.dx(x1, v1));
      if (k > 0) force += h * (cd.omega(xm).transpose() * lam);
      r.segment(n, n) = p1 - s.p - force;
      if (k > 0) r.segment(2 * n, k) = cd.omega(x1) * (p1 - lm.dv(x1, v1));
      return r;
    };
    Vec z0(2 * n + k);
    z0.segment(0, n) = s.x + h * s.v;
    z0.segment(n, n) = s.p;
    z0.segment(2 * n, k) = s.lambda;
    const NewtonResult r = newton_solve(residual, z0, opts);

    MechState next;
    next.t = t0 + (i + 1) * h;
    next.x = r.z.segment(0, n);
    next.p = r.z.segment(n, n);
    next.lambda = r.z.segment(2 * n, k);
    next.v = velocity(next.x, next.p);
    traj.dirac_residual.push_back(membership_residual(step_dirac_membership(lm, cd, s, next)));
    record_sample(traj, lm, cd, next);
    s = std::move(next);
  }
  if (traj.states.size() > 1) traj.states[0].lambda = traj.states[1].lambda;
  return traj;
}

std::vector<double> euler_lagrange_residual(const LagrangianModel& lm, const Trajectory& traj,
                                            const ConstraintDistribution* cd) {
  const std::size_t n = traj.states.size();
  if (n < 3) throw ArgumentError("euler_lagrange_residual: too few samples");
  std::vector<double> t(n);
  std::vector<Vec> mom(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.states[i].t;
    mom[i] = lm.dv(traj.states[i].x, traj.states[i].v);
  }
  const std::vector<Vec> dmom = differentiate_samples(t, mom);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MechState& s = traj.states[i];
    Vec r = lm.dx(s.x, s.v) - dmom[i];
    if (cd && cd->k() > 0) {
      const Mat b = constraint_frame(*cd, s.x).delta;
      r = b * (b.transpose() * r);
    }
    out[i] = inf_norm(r);
  }
  return out;
}

double action_derivative(const LagrangianModel& lm, const SampledCurve& curve,
                         const std::vector<Vec>& variation) {
  const std::size_t n = curve.t.size();
  if (curve.x.size() != n || variation.size() != n) throw DimensionError("action_derivative: sample counts differ");
  if (!curve.v.empty() && curve.v.size() != n) throw DimensionError("action_derivative: velocity sample count");
  if (n < 3) throw ArgumentError("action_derivative: too few samples");
  double vscale = 0.0;
  for (const Vec& d : variation) vscale = std::max(vscale, inf_norm(d));
  if (inf_norm(variation.front()) > 1e-12 * std::max(1.0, vscale) ||
      inf_norm(variation.back()) > 1e-12 * std::max(1.0, vscale)) {
    throw ArgumentError("action_derivative: variation must vanish at both ends");
  }
  const std::vector<Vec> v = curve.v.empty() ? differentiate_samples(curve.t, curve.x) : curve.v;
  std::vector<Vec> mom(n);
  for (std::size_t i = 0; i < n; ++i) mom[i] = lm.dv(curve.x[i], v[i]);
  const std::vector<Vec> dmom = differentiate_samples(curve.t, mom);
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    integrand[i] = (lm.dx(curve.x[i], v[i]) - dmom[i]).dot(variation[i]);
  }
  return simpson(curve.t, integrand);
}

double relative_energy_drift(const Trajectory& traj) {
  if (traj.energy.empty()) return 0.0;
  const double e0 = traj.energy.front();
  const double scale = e0 != 0.0 ? std::abs(e0) : 1.0;
  double worst = 0.0;
  for (double e : traj.energy) worst = std::max(worst, std::abs(e - e0));
  return worst / scale;
}

}  // namespace dirac
