#pragma once

#include "dirac/pontryagin_linear.hpp"

#include <optional>
#include <random>

namespace dirac {

using VectorFieldFn = std::function<Vec(const Vec&)>;
using JacobianFieldFn = std::function<Mat(const Vec&)>;  // J(i,j) = d f_i / d x_j

// Section x -> (X(x), alpha(x)) of the Pontryagin bundle over an open box.
class SectionField {
 public:
  SectionField(int n, VectorFieldFn X, VectorFieldFn alpha, Box domain = {});
  static SectionField constant(const Vec& X, const Vec& alpha);

  SectionField& with_jacobians(JacobianFieldFn dX, JacobianFieldFn dalpha);

  int dim() const { return n_; }
  const Box& domain() const { return domain_; }
  bool has_exact_jacobians() const { return static_cast<bool>(dX_); }

  PontryaginElement at(const Vec& x) const;
  Mat jacobian_X(const Vec& x, double step_scale = 1.0) const;
  Mat jacobian_alpha(const Vec& x, double step_scale = 1.0) const;

  // Largest mismatch between supplied Jacobians and central differences at
  // random probes; throws InvariantError above 1e-5.
  double validate(std::mt19937_64& rng, int probes, double radius = 1.0) const;

 private:
  void check_point(const Vec& x) const;

  int n_;
  VectorFieldFn X_;
  VectorFieldFn alpha_;
  JacobianFieldFn dX_;
  JacobianFieldFn dalpha_;
  Box domain_;
};

enum class BracketConvention {
  kWorking,    // ([X,Y], L_X b - L_Y a - 1/2 d(i_Y a - i_X b))
  kClassical,  // ([X,Y], L_X b - L_Y a + 1/2 d(a(Y) - b(X)))
};

struct BracketOptions {
  BracketConvention convention = BracketConvention::kWorking;
  double step_scale = 1.0;
};

struct BracketResult {
  PontryaginElement value;
  double residual_estimate = 0.0;
};

BracketResult courant_bracket(const SectionField& s1, const SectionField& s2, const Vec& x,
                              const BracketOptions& opts = {});

double courant_tensor(const SectionField& s1, const SectionField& s2, const SectionField& s3,
                      const Vec& x, const BracketOptions& opts = {});

struct InvolutivityReport {
  double max_abs_tensor = 0.0;
  double scale = 1.0;
  bool involutive = true;
  int points = 0;
  int triples = 0;
  Vec worst_point;
};

// Sweeps all frame triples i <= j <= k over the sample points.
InvolutivityReport involutivity_test(const std::vector<SectionField>& frame,
                                     const std::vector<Vec>& points,
                                     const BracketOptions& opts = {},
                                     Execution exec = Execution::kParallel);

}  // namespace dirac
