#include "dirac/direct_limit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dirac {

AscendingFamily::AscendingFamily(std::string name, LevelBuilder builder, int min_level,
                                 int max_level)
    : name_(std::move(name)), builder_(std::move(builder)), min_level_(min_level),
      max_level_(max_level) {
  if (min_level < 1 || max_level < min_level) throw ArgumentError("AscendingFamily: need 1 <= min_level <= max_level");
}

LevelSystem AscendingFamily::level(int n) const {
  if (n < min_level_ || n > max_level_) throw ArgumentError("AscendingFamily: level out of range");
  LevelSystem s = builder_(n);
  if (s.dim < 1 || s.cd.n() != s.dim || s.lm.dim() != s.dim) {
    throw DimensionError("AscendingFamily: level system dimensions disagree");
  }
  return s;
}

int AscendingFamily::dim(int n) const { return level(n).dim; }

Vec pad(const Vec& v, int dim) {
  if (v.size() > dim) throw DimensionError("pad: vector longer than the target dimension");
  Vec out = Vec::Zero(dim);
  out.head(v.size()) = v;
  return out;
}

NestingReport nesting_check(const AscendingFamily& f, int probes, std::uint64_t seed,
                            double radius, const NestingTolerances& tol) {
  if (probes < 1) throw ArgumentError("nesting_check: probe count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  NestingReport rep;
  rep.pass = true;
  for (int n = f.min_level(); n < f.max_level(); ++n) {
    const LevelSystem lo = f.level(n);
    const LevelSystem hi = f.level(n + 1);
    if (hi.dim < lo.dim) throw DimensionError("nesting_check: level dimensions must not decrease");
    NestingLevel row;
    row.level = n;
    for (int j = 0; j < probes; ++j) {
      Vec x(lo.dim);
      for (int i = 0; i < lo.dim; ++i) x[i] = radius * unit(rng);
      const Mat delta = constraint_frame(lo.cd, x).delta;
      Vec c(delta.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = unit(rng);
      const Vec v = delta * c;
      const Vec xp = pad(x, hi.dim);
      const Vec vp = pad(v, hi.dim);

      const Mat w_hi = hi.cd.omega(xp);
      const Mat restricted = null_space(w_hi.leftCols(lo.dim), lo.dim);
      row.delta_gap = std::max(row.delta_gap, subspace_gap(Subspace::from_orthonormal(lo.dim, restricted),
                                                           delta_fiber(lo.cd, x)));

      const double l_lo = lo.lm.value(x, v);
      row.lagrangian_mismatch = std::max(
          row.lagrangian_mismatch, std::abs(hi.lm.value(xp, vp) - l_lo) / std::max(1.0, std::abs(l_lo)));

      const Vec dv_lo = lo.lm.dv(x, v);
      const Vec dx_lo = lo.lm.dx(x, v);
      double diff = inf_norm(hi.lm.dv(xp, vp) - pad(dv_lo, hi.dim)) / std::max(1.0, inf_norm(dv_lo));
      diff = std::max(diff, inf_norm(row_space_residual(w_hi, hi.lm.dx(xp, vp) - pad(dx_lo, hi.dim))) /
                                std::max(1.0, inf_norm(dx_lo)));
      const Mat w_lo = lo.cd.omega(x);
      for (Eigen::Index r = 0; r < w_lo.rows(); ++r) {
        const Vec rowvec = w_lo.row(r).transpose();
        diff = std::max(diff, inf_norm(row_space_residual(w_hi, pad(rowvec, hi.dim))) /
                                  std::max(inf_norm(rowvec), 1e-300));
      }
      row.differential_mismatch = std::max(row.differential_mismatch, diff);
    }
    row.pass = row.delta_gap <= tol.delta_gap && row.lagrangian_mismatch <= tol.lagrangian &&
               row.differential_mismatch <= tol.differential;
    if (!row.pass && rep.pass) {
      rep.pass = false;
      rep.breaking_level = n;
    }
    rep.levels.push_back(row);
  }
  return rep;
}

int stabilization_level(const AscendingFamily& f, const Vec& x0, const Vec& v0) {
  const Eigen::Index len = std::max(x0.size(), v0.size());
  Eigen::Index last = -1;
  for (Eigen::Index i = 0; i < len; ++i) {
    if ((i < x0.size() && x0[i] != 0.0) || (i < v0.size() && v0[i] != 0.0)) last = i;
  }
  for (int n = f.min_level(); n <= f.max_level(); ++n) {
    if (last < f.dim(n)) return n;
  }
  throw ArgumentError("stabilization_level: data is nonzero beyond the largest level");
}

Trajectory integrate_at_level(const AscendingFamily& f, int n, const MechState& init, double T,
                              double dt, const NewtonOptions& opts) {
  const LevelSystem sys = f.level(n);
  MechState s = init;
  s.x = pad(init.x, sys.dim);
  s.v = pad(init.v, sys.dim);
  return integrate_implicit_lagrangian(sys.lm, sys.cd, s, T, dt, opts);
}

std::vector<Trajectory> integrate_levels(const AscendingFamily& f, const std::vector<int>& levels,
                                         const MechState& init, double T, double dt,
                                         Execution exec, const NewtonOptions& opts) {
  std::vector<Trajectory> out(levels.size());
  for_each_index(exec, static_cast<int>(levels.size()), [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = integrate_at_level(f, levels[idx], init, T, dt, opts);
  });
  return out;
}

LimitReport limit_consistency(const AscendingFamily& f, const MechState& init, int n, int n_prime,
                              double T, double dt, Execution exec, double tol) {
  if (n_prime <= n) throw ArgumentError("limit_consistency: n_prime must exceed n");
  LimitReport rep;
  rep.level = n;
  rep.level_prime = n_prime;
  rep.stabilization = stabilization_level(f, init.x, init.v);
  if (rep.stabilization > n) throw ArgumentError("limit_consistency: initial data does not stabilize at level n");
  const std::vector<Trajectory> runs = integrate_levels(f, {n, n_prime}, init, T, dt, exec);
  const Trajectory& a = runs[0];
  const Trajectory& b = runs[1];
  if (a.size() != b.size()) throw SolverError("limit_consistency: sample counts differ between levels");
  const int dim = f.dim(n_prime);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const MechState& sa = a.states[i];
    const MechState& sb = b.states[i];
    rep.gap = std::max({rep.gap, inf_norm(pad(sa.x, dim) - sb.x), inf_norm(pad(sa.v, dim) - sb.v),
                        inf_norm(pad(sa.p, dim) - sb.p)});
  }
  rep.pass = rep.gap <= tol;
  return rep;
}

RankWitness endpoint_rank_witness(const AscendingFamily& f, int n, const Vec& x0, int steps,
                                  double dt) {
  if (steps < 1 || !(dt > 0.0)) throw ArgumentError("endpoint_rank_witness: need positive steps and dt");
  const LevelSystem sys = f.level(n);
  const Vec start = pad(x0, sys.dim);
  const int m = sys.cd.m();
  RankWitness w;
  w.level = n;
  w.dim = sys.dim;
  w.controls = steps * m;
  if (m == 0) return w;
  Vec ref(w.controls);
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < m; ++i) ref[k * m + i] = 0.5 * std::sin(1.0 + k + 0.7 * i);
  }
  const auto endpoint = [&](const Vec& u) -> Vec {
    Vec x = start;
    for (int k = 0; k < steps; ++k) {
      const Mat p = constraint_frame(sys.cd, x).delta;
      x += dt * (p * u.segment(k * m, m));
    }
    return x;
  };
  w.rank = numerical_rank(jacobian_fd(endpoint, ref), 1e-8);
  return w;
}

}  // namespace dirac
