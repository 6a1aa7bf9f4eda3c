#pragma once

#include "dirac/constraint_dirac.hpp"
#include "dirac/newton.hpp"

#include <random>
#include <string>

namespace dirac {

using LagrangianFn = std::function<double(const Vec& x, const Vec& v)>;
using LagrangianGradFn = std::function<Vec(const Vec& x, const Vec& v)>;
using LagrangianHessFn = std::function<Mat(const Vec& x, const Vec& v)>;

// L(x, v) with optional derivative evaluators; missing ones fall back to
// central differences. dxdv(i, j) = d^2 L / dv_i dx_j.
class LagrangianModel {
 public:
  LagrangianModel(int n, LagrangianFn L, Box domain = {});
  // 1/2 v^T M v - 1/2 x^T K x with all derivatives exact.
  static LagrangianModel quadratic(const Mat& mass, const Mat& stiffness);

  LagrangianModel& with_dx(LagrangianGradFn f);
  LagrangianModel& with_dv(LagrangianGradFn f);
  LagrangianModel& with_dvdv(LagrangianHessFn f);
  LagrangianModel& with_dxdv(LagrangianHessFn f);

  int dim() const { return n_; }
  const Box& domain() const { return domain_; }

  double value(const Vec& x, const Vec& v) const;
  Vec dx(const Vec& x, const Vec& v) const;
  Vec dv(const Vec& x, const Vec& v) const;
  Mat dvdv(const Vec& x, const Vec& v) const;
  Mat dxdv(const Vec& x, const Vec& v) const;

  // Largest relative mismatch of supplied derivatives against central
  // differences; throws InvariantError above 1e-5.
  double validate(std::mt19937_64& rng, int probes, double radius = 1.0) const;

 private:
  void check(const Vec& x, const Vec& v) const;

  int n_;
  LagrangianFn L_;
  LagrangianGradFn dx_;
  LagrangianGradFn dv_;
  LagrangianHessFn dvdv_;
  LagrangianHessFn dxdv_;
  Box domain_;
};

struct MechState {
  double t = 0.0;
  Vec x;
  Vec v;
  Vec p;
  Vec lambda;
};

enum class TrajectoryKind { kImplicit, kNormalExtremal };

// Samples plus per-sample diagnostics. For normal extremals, v holds rho(x)u,
// controls holds u, energy holds h and constraint_residual the fibre
// stationarity residual.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::kImplicit;
  int n = 0;
  int k = 0;
  int fibre_dim = 0;
  std::vector<MechState> states;
  std::vector<Vec> controls;
  std::vector<double> energy;
  std::vector<double> constraint_residual;
  std::vector<double> legendre_residual;
  std::vector<double> dirac_residual;  // one per step
  std::vector<std::string> warnings;
  bool normal = false;

  std::size_t size() const { return states.size(); }
};

Vec legendre(const LagrangianModel& lm, const Vec& x, const Vec& v);

// Solves dL/dv(x, v) = p for v in Delta_x, up to the Delta^0 component of p.
Vec legendre_inverse(const LagrangianModel& lm, const ConstraintDistribution& cd, const Vec& x,
                     const Vec& p, const Vec& v_guess, const NewtonOptions& opts = {});
Vec legendre_inverse(const LagrangianModel& lm, const Vec& x, const Vec& p, const Vec& v_guess,
                     const NewtonOptions& opts = {});

double generalized_energy(const LagrangianModel& lm, const Vec& x, const Vec& v, const Vec& p);

struct DiracDifferential {
  Vec x;
  Vec p;  // dL/dv
  Vec a;  // -dL/dx
  Vec w;  // v
};
DiracDifferential dirac_differential(const LagrangianModel& lm, const Vec& x, const Vec& v);

struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
};

// Trapezoidal step: x1 = x0 + dt/2 (v0 + v1),
// p1 = p0 + dt/2 (dL/dx(x0,v0) + dL/dx(x1,v1)) + dt omega(xm)^T lambda,
// p1 = dL/dv(x1, v1), omega(x1) v1 = 0, with xm the midpoint configuration.
MechState step_implicit_lagrangian(const LagrangianModel& lm, const ConstraintDistribution& cd,
                                   const MechState& s, double dt, const NewtonOptions& opts = {},
                                   StepInfo* info = nullptr);

// init supplies (t, x, v); p is recomputed from the Legendre map and v is
// projected onto Delta_x (with a warning) when it violates the constraint.
Trajectory integrate_implicit_lagrangian(const LagrangianModel& lm,
                                         const ConstraintDistribution& cd, const MechState& init,
                                         double T, double dt, const NewtonOptions& opts = {});

double induced_hamiltonian(const LagrangianModel& lm, const ConstraintDistribution& cd,
                           const Vec& x, const Vec& p, const Vec& v_guess = {});

// (x, p) scheme on the primary constraint with v recovered by legendre_inverse.
Trajectory integrate_implicit_hamiltonian(const LagrangianModel& lm,
                                          const ConstraintDistribution& cd, const Vec& x0,
                                          const Vec& p0, double T, double dt,
                                          const NewtonOptions& opts = {}, double t0 = 0.0);

// Residual rows of one accepted step recast in the local form of D_Delta:
// tangent and w = xdot conditions at the new state, annihilator condition at
// the midpoint configuration with the scheme's discrete pdot and force.
MembershipReport step_dirac_membership(const LagrangianModel& lm,
                                       const ConstraintDistribution& cd, const MechState& s0,
                                       const MechState& s1, double tol = 1e-8);

// Number of uniform steps used for a horizon T with maximal step dt.
int step_count(double T, double dt);

std::vector<double> euler_lagrange_residual(const LagrangianModel& lm, const Trajectory& traj,
                                            const ConstraintDistribution* cd = nullptr);

struct SampledCurve {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;  // optional; differentiated from x when empty
};

double action_derivative(const LagrangianModel& lm, const SampledCurve& curve,
                         const std::vector<Vec>& variation);

// Relative drift max_k |E_k - E_0| / |E_0| (|E_0| replaced by 1 when zero).
double relative_energy_drift(const Trajectory& traj);

}  // namespace dirac
