#pragma once

#include "dirac/anchored_singular.hpp"

#include <cstdint>

namespace dirac {

using FibreScalarFn = std::function<double(const Vec&)>;
using FibreVectorFn = std::function<Vec(const Vec&)>;
using FibreMatrixFn = std::function<Mat(const Vec&)>;

// Positively 1-homogeneous F on a conic open set. Gradient and Hessian refer
// to 1/2 F^2 and fall back to finite differences when absent.
class ConicMinkowskiNorm {
 public:
  ConicMinkowskiNorm(int k, FibreScalarFn F, ConePredicate domain = {});

  ConicMinkowskiNorm& with_gradient(FibreVectorFn f);
  ConicMinkowskiNorm& with_hessian(FibreMatrixFn f);

  int dim() const { return k_; }
  bool in_domain(const Vec& u) const;
  bool has_hessian() const { return static_cast<bool>(hess_); }

  double value(const Vec& u) const;
  double operator()(const Vec& u) const { return value(u); }
  Vec half_square_gradient(const Vec& u) const;
  Mat hessian(const Vec& u) const;

 private:
  void check(const Vec& u) const;

  int k_;
  FibreScalarFn F_;
  ConePredicate domain_;
  FibreVectorFn grad_;
  FibreMatrixFn hess_;
};

// g_u(v, w); analytic Hessian when supplied, else a central mixed second
// difference of 1/2 F^2 with step eps^(1/4) max(1, |u|), halved until the
// stencil stays inside the domain.
double hessian_g(const ConicMinkowskiNorm& norm, const Vec& u, const Vec& v, const Vec& w);
double hessian_g_fd(const ConicMinkowskiNorm& norm, const Vec& u, const Vec& v, const Vec& w);

ConicMinkowskiNorm euclidean_norm(int k);
// sqrt(u^T G u) + xi . u; requires |xi|_{G^-1} < 1.
ConicMinkowskiNorm randers_norm(const Mat& metric, const Vec& xi);

struct MinkowskiProbeReport {
  int probes = 0;
  double min_positivity = 0.0;  // min F(u) / |u|
  double homogeneity = 0.0;     // |F(lu) - l F(u)| / (l F(u))
  double hessian_scaling = 0.0; // |g_{lu} - g_u| / |g_u|
  double hessian_diagonal = 0.0;// |g_u(u,u) - F(u)^2| / F(u)^2
  double polarization = 0.0;    // |g_u(u,w) - 1/2 d/ds F^2(u + s w)| / sqrt(g_u(u,u) g_u(w,w))
  double min_eigenvalue = 0.0;  // smallest eigenvalue of g_u over its largest

  double worst() const;
  bool pass(double tol = 1e-8) const;
};

// Random probes drawn up front from seed; evaluation runs serially or in
// parallel with identical results.
MinkowskiProbeReport minkowski_property_probe(const ConicMinkowskiNorm& norm, int probes,
                                              std::uint64_t seed,
                                              Execution exec = Execution::kSerial);

using NormFieldFn = std::function<ConicMinkowskiNorm(const Vec& x)>;
using HalfSquareDxFn = std::function<Vec(const Vec& x, const Vec& u)>;

// A conic Minkowski norm on each fibre of an anchored bundle.
class ConicFinslerStructure {
 public:
  ConicFinslerStructure(AnchoredBundle bundle, NormFieldFn norm_at);
  static ConicFinslerStructure riemannian(AnchoredBundle bundle, const Mat& metric);

  // d/dx of 1/2 F^2; central differences otherwise.
  ConicFinslerStructure& with_dx(HalfSquareDxFn f);

  const AnchoredBundle& bundle() const { return bundle_; }
  ConicMinkowskiNorm norm_at(const Vec& x) const;
  double F(const Vec& x, const Vec& u) const;

  // 1/2 F^2 as a singular Lagrangian on the bundle restricted to the cone.
  SingularLagrangian lagrangian() const;

  // Fibre invariants at sampled base points plus a continuity probe in x;
  // returns the worst fibre report and throws InvariantError on failure.
  MinkowskiProbeReport validate(std::uint64_t seed, int base_probes, int fibre_probes,
                                double radius = 1.0) const;

 private:
  AnchoredBundle bundle_;
  NormFieldFn norm_at_;
  HalfSquareDxFn dx_;
};

// Admissible lift: base samples x, fibre samples u with xdot = rho(x) u.
struct Lift {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> u;
};

double energy_of_lift(const ConicFinslerStructure& fs, const Lift& lift);
double length_of_lift(const ConicFinslerStructure& fs, const Lift& lift);

// Same curve over the same time interval and sample count, traversed at
// constant F.
Lift constant_speed_reparametrize(const ConicFinslerStructure& fs, const Lift& lift);

Trajectory normal_geodesic(const ConicFinslerStructure& fs, const Vec& x0, const Vec& p0, double T,
                           double dt, const FlowOptions& opts = {});

}  // namespace dirac
