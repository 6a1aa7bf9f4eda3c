#pragma once

#include "dirac/numerics.hpp"

namespace dirac {

// (u, alpha) in R^n + (R^n)*, flattened as [u; alpha].
struct PontryaginElement {
  Vec u;
  Vec alpha;

  PontryaginElement() = default;
  PontryaginElement(Vec u_in, Vec alpha_in);

  int dim() const { return static_cast<int>(u.size()); }
  Vec flat() const;
  static PontryaginElement from_flat(const Vec& z);
};

// <<(X,a),(Y,b)>> = b(X) + a(Y).
double pairing(const PontryaginElement& a, const PontryaginElement& b);
double pairing_flat(const Vec& a, const Vec& b);
// Matrix J with pairing_flat(a, b) = a^T J b on R^{2n}.
Mat pairing_matrix(int n);

class Subspace {
 public:
  static constexpr double kRankTol = 1e-10;

  // Orthonormalizes the spanning columns with an SVD; columns whose singular
  // value falls below rank_tol times the largest are dropped.
  Subspace(int ambient_dim, const Mat& spanning_columns, double rank_tol = kRankTol);
  static Subspace from_orthonormal(int ambient_dim, Mat basis);
  static Subspace zero(int ambient_dim);
  static Subspace full(int ambient_dim);

  int ambient_dim() const { return ambient_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  Mat projector() const { return basis_ * basis_.transpose(); }
  double distance(const Vec& z) const;
  bool contains(const Vec& z, double tol = 1e-9) const;

 private:
  Subspace(int ambient_dim, Mat basis, bool);
  int ambient_;
  Mat basis_;
};

// Spectral norm of the projector difference; 1 when dimensions differ.
double subspace_gap(const Subspace& a, const Subspace& b);
bool same_subspace(const Subspace& a, const Subspace& b, double tol = 1e-9);

// Complement with respect to the symmetric pairing, not the Euclidean product.
Subspace orthogonal_complement(const Subspace& s);

struct DiracReport {
  bool almost_dirac = false;
  double gram_residual = 0.0;
  int dim = 0;
  int half_ambient = 0;
};

DiracReport is_almost_dirac(const Subspace& s);

class LinearDiracStructure {
 public:
  // With verify set, throws InvariantError unless the space is almost Dirac.
  LinearDiracStructure(int n, Subspace space, bool verify = true);

  int n() const { return n_; }
  const Subspace& space() const { return space_; }
  bool verified_dirac() const { return verified_; }
  PontryaginElement element(int i) const;

 private:
  int n_;
  Subspace space_;
  bool verified_;
};

void require_skew(const Mat& m, const char* what);

LinearDiracStructure graph_of_two_form(const Mat& omega);
LinearDiracStructure graph_of_poisson(const Mat& p);

// [[0, -I], [I, 0]]: maps (xdot, pdot) to the covector (a, w) = (-pdot, xdot).
Mat canonical_symplectic(int n);

// Fibre over T*Q of the structure induced by delta (a subspace of R^n):
// {((xdot, pdot), (a, w)) : xdot in delta, w = xdot, a + pdot in delta^0}
// for the canonical form, and {(u, Omega u + eta)} with u in delta x R^n and
// eta in delta^0 x 0 in general.
LinearDiracStructure induced_dirac_fiber(const Subspace& delta, const Mat& omega);
LinearDiracStructure induced_dirac_fiber(const Subspace& delta);

}  // namespace dirac
