#pragma once

#include "dirac/implicit_mechanics.hpp"

#include <random>

namespace dirac {

using AnchorFn = std::function<Mat(const Vec&)>;                      // n x k
using AnchorDerivativeFn = std::function<std::vector<Mat>(const Vec&)>;  // d rho / d x_i
using ConePredicate = std::function<bool(const Vec&)>;

// Anchored bundle R^n x R^k -> TR^n, (x, u) -> rho(x) u, with a conic open
// fibre domain E0.
class AnchoredBundle {
 public:
  AnchoredBundle(int n, int k, AnchorFn rho, Box domain = {});

  AnchoredBundle& with_derivative(AnchorDerivativeFn drho);
  AnchoredBundle& with_cone(ConePredicate cone);

  int n() const { return n_; }
  int k() const { return k_; }
  const Box& domain() const { return domain_; }
  bool in_domain(const Vec& x) const;
  bool in_cone(const Vec& u) const { return !cone_ || cone_(u); }

  Mat anchor(const Vec& x) const;
  std::vector<Mat> anchor_derivative(const Vec& x) const;

  // Constant rank at probes plus sampled cone scale-invariance; returns the
  // observed rank and throws InvariantError on failure.
  int validate(std::mt19937_64& rng, int probes, int declared_rank, double radius = 1.0) const;

 private:
  int n_;
  int k_;
  AnchorFn rho_;
  AnchorDerivativeFn drho_;
  ConePredicate cone_;
  Box domain_;
};

using FibreLagrangianFn = std::function<double(const Vec& x, const Vec& u)>;
using FibreGradFn = std::function<Vec(const Vec& x, const Vec& u)>;
using FibreHessFn = std::function<Mat(const Vec& x, const Vec& u)>;

class SingularLagrangian {
 public:
  SingularLagrangian(AnchoredBundle bundle, FibreLagrangianFn L);
  // 1/2 u^T G u on every fibre.
  static SingularLagrangian quadratic(AnchoredBundle bundle, const Mat& metric);

  SingularLagrangian& with_du(FibreGradFn f);
  SingularLagrangian& with_duu(FibreHessFn f);
  SingularLagrangian& with_dx(FibreGradFn f);

  const AnchoredBundle& bundle() const { return bundle_; }
  double value(const Vec& x, const Vec& u) const;
  Vec du(const Vec& x, const Vec& u) const;
  Mat duu(const Vec& x, const Vec& u) const;
  Vec dx(const Vec& x, const Vec& u) const;

  // Same problem in the fibre basis u = S w: rho -> rho S, L(w) -> L(S w).
  SingularLagrangian reparametrized(const Mat& s) const;

  // Fibre Hessian nondegeneracy at random probes of E0; throws InvariantError.
  void validate(std::mt19937_64& rng, int probes, double radius = 1.0) const;

 private:
  void check(const Vec& x, const Vec& u) const;

  AnchoredBundle bundle_;
  FibreLagrangianFn L_;
  FibreGradFn du_;
  FibreHessFn duu_;
  FibreGradFn dx_;
};

// H^nu(x, u, p) = <p, rho(x) u> - nu L(x, u).
double control_hamiltonian(const SingularLagrangian& sl, const Vec& x, const Vec& u, const Vec& p,
                           double nu);

// Solves dL/du(x, u) = rho(x)^T p by Newton from u_guess.
Vec fibre_stationarity_solve(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                             const Vec& u_guess, const NewtonOptions& opts = {});

double reduced_hamiltonian(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                           const Vec& u_guess = {});

struct PhaseVelocity {
  Vec xdot;
  Vec pdot;
  Vec u;  // stationary fibre point
};

// Envelope-theorem gradients of h: xdot = rho u*, pdot_i = -(p^T d_i rho u* - d_i L).
PhaseVelocity hamiltonian_vector_field(const SingularLagrangian& sl, const Vec& x, const Vec& p,
                                       const Vec& u_guess = {});

struct FlowOptions {
  double blowup = 1e12;
  NewtonOptions newton;
};

// RK4 on (x, p); records u, h = H^1 at u, and the stationarity residual.
Trajectory integrate_normal_extremal(const SingularLagrangian& sl, const Vec& x0, const Vec& p0,
                                     double T, double dt, const FlowOptions& opts = {});

struct PhasePoint {
  Vec x;
  Vec p;
};

// Endpoint of the same RK4 flow over a signed duration (negative runs backward).
PhasePoint flow_normal_extremal(const SingularLagrangian& sl, const Vec& x0, const Vec& p0,
                                double duration, double dt, const FlowOptions& opts = {});

struct PontryaginRows {
  double state = 0.0;         // |xdot - rho(x) u|
  double costate = 0.0;       // |pdot + dH/dx|
  double stationarity = 0.0;  // |rho^T p - nu dL/du|
};

std::vector<PontryaginRows> pontryagin_residual(const SingularLagrangian& sl,
                                                const Trajectory& traj, double nu);

}  // namespace dirac
