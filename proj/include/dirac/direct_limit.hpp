#pragma once

#include "dirac/implicit_mechanics.hpp"

#include <cstdint>
#include <string>

namespace dirac {

struct LevelSystem {
  int dim = 0;
  ConstraintDistribution cd;
  LagrangianModel lm;
};

using LevelBuilder = std::function<LevelSystem(int level)>;

// Nested systems indexed by level in [min_level, max_level]; R^dim(n) sits in
// R^dim(n+1) by zero-padding.
class AscendingFamily {
 public:
  AscendingFamily(std::string name, LevelBuilder builder, int min_level, int max_level);

  const std::string& name() const { return name_; }
  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }

  LevelSystem level(int n) const;
  int dim(int n) const;

 private:
  std::string name_;
  LevelBuilder builder_;
  int min_level_;
  int max_level_;
};

Vec pad(const Vec& v, int dim);

struct NestingLevel {
  int level = 0;
  double delta_gap = 0.0;          // ker of omega_{n+1} on R^dim(n) against Delta_n
  double lagrangian_mismatch = 0.0;// |L_{n+1}(pad) - L_n|
  double differential_mismatch = 0.0;
  bool pass = false;
};

struct NestingReport {
  std::vector<NestingLevel> levels;
  bool pass = false;
  int breaking_level = -1;  // first failing level, -1 when none
};

struct NestingTolerances {
  double delta_gap = 1e-9;
  double lagrangian = 1e-12;
  double differential = 1e-8;
};

// The differential residual asks that the padded Dirac differential of L_n
// is the restriction of that of L_{n+1} modulo the annihilator of Delta_{n+1}:
// dL_{n+1}/dv(pad) = pad dL_n/dv, dL_{n+1}/dx(pad) - pad dL_n/dx in the row
// space of omega_{n+1}, and padded rows of omega_n in that row space.
NestingReport nesting_check(const AscendingFamily& f, int probes, std::uint64_t seed,
                            double radius = 0.5, const NestingTolerances& tol = {});

// Smallest level whose coordinates carry all nonzero entries of x0 and v0.
int stabilization_level(const AscendingFamily& f, const Vec& x0, const Vec& v0);

Trajectory integrate_at_level(const AscendingFamily& f, int n, const MechState& init, double T,
                              double dt, const NewtonOptions& opts = {});

std::vector<Trajectory> integrate_levels(const AscendingFamily& f, const std::vector<int>& levels,
                                         const MechState& init, double T, double dt,
                                         Execution exec = Execution::kSerial,
                                         const NewtonOptions& opts = {});

struct LimitReport {
  int level = 0;
  int level_prime = 0;
  int stabilization = 0;
  double gap = 0.0;  // sup over samples of the padded x, v, p differences
  bool pass = false;
};

LimitReport limit_consistency(const AscendingFamily& f, const MechState& init, int n, int n_prime,
                              double T, double dt, Execution exec = Execution::kSerial,
                              double tol = 1e-9);

struct RankWitness {
  int level = 0;
  int dim = 0;
  int controls = 0;
  int rank = 0;
};

// Rank of the linearized endpoint map of x_{k+1} = x_k + dt P(x_k) u_k at a
// fixed reference control sequence, P an orthonormal Delta basis.
RankWitness endpoint_rank_witness(const AscendingFamily& f, int n, const Vec& x0, int steps,
                                  double dt);

}  // namespace dirac
