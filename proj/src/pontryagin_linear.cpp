#include "dirac/pontryagin_linear.hpp"

#include <algorithm>
#include <cmath>

namespace dirac {

PontryaginElement::PontryaginElement(Vec u_in, Vec alpha_in)
    : u(std::move(u_in)), alpha(std::move(alpha_in)) {
  if (u.size() < 1) throw DimensionError("PontryaginElement: dimension must be at least 1");
  require_same_size(u, alpha, "PontryaginElement: tangent and covector");
}

Vec PontryaginElement::flat() const {
  Vec z(2 * u.size());
  z << u, alpha;
  return z;
}

PontryaginElement PontryaginElement::from_flat(const Vec& z) {
  if (z.size() % 2 != 0 || z.size() == 0) throw DimensionError("flattened Pontryagin element must have even length");
  const Eigen::Index n = z.size() / 2;
  return {z.head(n), z.tail(n)};
}

namespace {

double dot_fixed(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double pairing(const PontryaginElement& a, const PontryaginElement& b) {
  if (a.u.size() != b.u.size()) throw DimensionError("pairing: incompatible fibres");
  return dot_fixed(b.alpha, a.u) + dot_fixed(a.alpha, b.u);
}

double pairing_flat(const Vec& a, const Vec& b) {
  require_same_size(a, b, "pairing");
  if (a.size() % 2 != 0) throw DimensionError("pairing: odd ambient dimension");
  const Eigen::Index n = a.size() / 2;
  return dot_fixed(b.tail(n), a.head(n)) + dot_fixed(a.tail(n), b.head(n));
}

Mat pairing_matrix(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n).setIdentity();
  return j;
}

Subspace::Subspace(int ambient_dim, Mat basis, bool) : ambient_(ambient_dim), basis_(std::move(basis)) {}

Subspace::Subspace(int ambient_dim, const Mat& spanning_columns, double rank_tol)
    : ambient_(ambient_dim) {
  if (spanning_columns.rows() != ambient_dim) throw DimensionError("Subspace: basis rows differ from ambient dimension");
  if (spanning_columns.cols() == 0) {
    basis_.resize(ambient_dim, 0);
    return;
  }
  Eigen::JacobiSVD<Mat> svd(spanning_columns, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rank_tol * s[0] && s[i] > 0.0) ++rank;
  }
  basis_ = svd.matrixU().leftCols(rank);
}

Subspace Subspace::from_orthonormal(int ambient_dim, Mat basis) {
  if (basis.rows() != ambient_dim) throw DimensionError("Subspace: basis rows differ from ambient dimension");
  return Subspace(ambient_dim, std::move(basis), true);
}

Subspace Subspace::zero(int ambient_dim) { return Subspace(ambient_dim, Mat(ambient_dim, 0), true); }

Subspace Subspace::full(int ambient_dim) {
  return Subspace(ambient_dim, Mat::Identity(ambient_dim, ambient_dim), true);
}

double Subspace::distance(const Vec& z) const {
  require_size(z, ambient_, "Subspace::distance");
  return (z - basis_ * (basis_.transpose() * z)).norm();
}

bool Subspace::contains(const Vec& z, double tol) const {
  return distance(z) <= tol * std::max(1.0, z.norm());
}

double subspace_gap(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("subspace_gap: different ambient spaces");
  if (a.dim() != b.dim()) return 1.0;
  if (a.dim() == 0) return 0.0;
  const Mat diff = a.projector() - b.projector();
  Eigen::JacobiSVD<Mat> svd(diff);
  return svd.singularValues()[0];
}

bool same_subspace(const Subspace& a, const Subspace& b, double tol) {
  return subspace_gap(a, b) <= tol;
}

Subspace orthogonal_complement(const Subspace& s) {
  const int amb = s.ambient_dim();
  if (amb % 2 != 0) throw DimensionError("orthogonal_complement: ambient dimension must be even");
  // z pairs to zero with S iff J z is Euclidean-orthogonal to S.
  Mat eucl;
  if (s.dim() == 0) {
    eucl = Mat::Identity(amb, amb);
  } else {
    Eigen::HouseholderQR<Mat> qr(s.basis());
    const Mat q = qr.householderQ() * Mat::Identity(amb, amb);
    eucl = q.rightCols(amb - s.dim());
  }
  return Subspace::from_orthonormal(amb, pairing_matrix(amb / 2) * eucl);
}

DiracReport is_almost_dirac(const Subspace& s) {
  DiracReport rep;
  rep.dim = s.dim();
  rep.half_ambient = s.ambient_dim() / 2;
  if (s.ambient_dim() % 2 != 0) return rep;
  if (s.dim() > 0) {
    const Mat& b = s.basis();
    const Mat gram = b.transpose() * pairing_matrix(rep.half_ambient) * b;
    rep.gram_residual = gram.cwiseAbs().maxCoeff();
  }
  rep.almost_dirac = rep.gram_residual <= 1e-10 && rep.dim == rep.half_ambient;
  return rep;
}

LinearDiracStructure::LinearDiracStructure(int n, Subspace space, bool verify)
    : n_(n), space_(std::move(space)), verified_(false) {
  if (space_.ambient_dim() != 2 * n) throw DimensionError("LinearDiracStructure: ambient dimension must be 2n");
  if (verify) {
    const DiracReport rep = is_almost_dirac(space_);
    if (!rep.almost_dirac) throw InvariantError("LinearDiracStructure: subspace is not almost Dirac");
    verified_ = true;
  }
}

PontryaginElement LinearDiracStructure::element(int i) const {
  return PontryaginElement::from_flat(space_.basis().col(i));
}

void require_skew(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + ": matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw InvariantError(std::string(what) + ": matrix is not skew-symmetric");
}

LinearDiracStructure graph_of_two_form(const Mat& omega) {
  require_skew(omega, "graph_of_two_form");
  const Eigen::Index n = omega.rows();
  Mat cols(2 * n, n);
  cols << Mat::Identity(n, n), omega;
  return LinearDiracStructure(static_cast<int>(n), Subspace(static_cast<int>(2 * n), cols));
}

LinearDiracStructure graph_of_poisson(const Mat& p) {
  require_skew(p, "graph_of_poisson");
  const Eigen::Index n = p.rows();
  Mat cols(2 * n, n);
  cols << p, Mat::Identity(n, n);
  return LinearDiracStructure(static_cast<int>(n), Subspace(static_cast<int>(2 * n), cols));
}

Mat canonical_symplectic(int n) {
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n).setIdentity();
  return omega;
}

LinearDiracStructure induced_dirac_fiber(const Subspace& delta, const Mat& omega) {
  const int n = delta.ambient_dim();
  if (n < 1) throw DimensionError("induced_dirac_fiber: base dimension must be at least 1");
  if (omega.rows() != 2 * n) throw DimensionError("induced_dirac_fiber: Omega must be 2n x 2n");
  require_skew(omega, "induced_dirac_fiber");
  const int m = delta.dim();

  Mat lift = Mat::Zero(2 * n, m + n);
  lift.topLeftCorner(n, m) = delta.basis();
  lift.bottomRightCorner(n, n).setIdentity();

  Mat eta = Mat::Zero(2 * n, n - m);
  if (m == 0) {
    eta.topRows(n).setIdentity();
  } else {
    Eigen::HouseholderQR<Mat> qr(delta.basis());
    const Mat q = qr.householderQ() * Mat::Identity(n, n);
    eta.topRows(n) = q.rightCols(n - m);
  }

  Mat cols(4 * n, 2 * n);
  cols.topLeftCorner(2 * n, m + n) = lift;
  cols.bottomLeftCorner(2 * n, m + n) = omega * lift;
  cols.topRightCorner(2 * n, n - m).setZero();
  cols.bottomRightCorner(2 * n, n - m) = eta;
  return LinearDiracStructure(2 * n, Subspace(4 * n, cols));
}

LinearDiracStructure induced_dirac_fiber(const Subspace& delta) {
  return induced_dirac_fiber(delta, canonical_symplectic(delta.ambient_dim()));
}

}  // namespace dirac
