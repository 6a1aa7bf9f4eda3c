#pragma once

#include "dirac/pontryagin_linear.hpp"

#include <random>

namespace dirac {

using ConstraintFormFn = std::function<Mat(const Vec&)>;  // rows are the one-forms omega_i(x)

// Delta_x = ker omega(x), with omega(x) a (n - m) x n matrix of full row rank.
class ConstraintDistribution {
 public:
  ConstraintDistribution(int n, int m, ConstraintFormFn omega, Box domain = {});
  static ConstraintDistribution unconstrained(int n);
  static ConstraintDistribution constant(const Mat& omega);

  int n() const { return n_; }
  int m() const { return m_; }
  int k() const { return n_ - m_; }
  const Box& domain() const { return domain_; }

  // Raw rows at x (shape and domain checked, rank not checked).
  Mat omega(const Vec& x) const;
  // Rows at x after the full-row-rank check.
  Mat checked_omega(const Vec& x) const;

  // Same distribution presented by R(x) * omega(x).
  ConstraintDistribution rescaled(std::function<Mat(const Vec&)> r) const;

  // Throws InvariantError if the rank condition fails at any probe.
  void validate(std::mt19937_64& rng, int probes, double radius = 1.0) const;

 private:
  int n_;
  int m_;
  ConstraintFormFn omega_;
  Box domain_;
};

// Orthonormal kernel basis (n x m) and orthonormalized row space (n x (n - m)),
// both from one Householder QR of omega(x)^T.
struct ConstraintFrame {
  Mat delta;
  Mat annihilator;
};
ConstraintFrame constraint_frame(const ConstraintDistribution& cd, const Vec& x);

Subspace delta_fiber(const ConstraintDistribution& cd, const Vec& x);
std::vector<Vec> annihilator_basis(const ConstraintDistribution& cd, const Vec& x);

// Component of r orthogonal to the row space of omega (least-squares residual).
Vec row_space_residual(const Mat& omega, const Vec& r);

struct DiracCandidate {
  Vec xdot;
  Vec pdot;
  Vec a;
  Vec w;
};

struct MembershipReport {
  bool member = false;
  double tangent_residual = 0.0;     // distance of xdot from Delta_x
  double velocity_residual = 0.0;    // |w - xdot|
  double annihilator_residual = 0.0; // distance of a + pdot from the row space
  double scale = 1.0;
};

MembershipReport induced_dirac_membership(const ConstraintDistribution& cd, const Vec& x,
                                          const Vec& p, const DiracCandidate& cand,
                                          double tol = 1e-8);

}  // namespace dirac
