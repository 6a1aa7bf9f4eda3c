#include "dirac/numerics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace dirac {

Box Box::cube(int n, double radius) {
  return {Vec::Constant(n, -radius), Vec::Constant(n, radius)};
}

bool Box::contains(const Vec& x) const {
  if (!bounded()) return x.allFinite();
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
  }
  return true;
}

double Box::fit_step(const Vec& x, int i, double h) const {
  if (!bounded()) return h;
  const double room = std::min(x[i] - lo[i], hi[i] - x[i]);
  if (!(room > 0.0)) throw DomainError("point outside domain box");
  const double step = std::min(h, 0.5 * room);
  if (step < 1e-3 * h) throw DomainError("finite-difference step underflow near domain boundary");
  return step;
}

void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": size " << a.size() << " vs " << b.size();
    throw DimensionError(os.str());
  }
}

void require_size(const Vec& a, Eigen::Index n, const char* what) {
  if (a.size() != n) {
    std::ostringstream os;
    os << what << ": expected size " << n << ", got " << a.size();
    throw DimensionError(os.str());
  }
}

double first_derivative_step(double xi) {
  return std::cbrt(kEps) * std::max(1.0, std::abs(xi));
}

double second_derivative_step(double scale) {
  return std::pow(kEps, 0.25) * std::max(1.0, scale);
}

Vec gradient_fd(const std::function<double(const Vec&)>& f, const Vec& x,
                const Box& box, double step_scale) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = box.fit_step(x, static_cast<int>(i), first_derivative_step(x[i]) * step_scale);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat jacobian_fd(const std::function<Vec(const Vec&)>& f, const Vec& x,
                const Box& box, double step_scale) {
  Vec xp = x;
  Mat jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = box.fit_step(x, static_cast<int>(j), first_derivative_step(x[j]) * step_scale);
    xp[j] = x[j] + h;
    const Vec fp = f(xp);
    xp[j] = x[j] - h;
    const Vec fm = f(xp);
    xp[j] = x[j];
    if (j == 0) jac.resize(fp.size(), x.size());
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  if (x.size() == 0) jac.resize(f(x).size(), 0);
  return jac;
}

double simpson(const std::vector<double>& t, const std::vector<double>& f) {
  if (t.size() != f.size()) throw DimensionError("simpson: grid and values differ in length");
  const std::size_t n = t.size();
  if (n < 2) throw ArgumentError("simpson: need at least two samples");
  if (n == 2) return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
  const std::size_t intervals = n - 1;
  const std::size_t paired = intervals - intervals % 2;
  double sum = 0.0;
  for (std::size_t i = 0; i + 2 <= paired; i += 2) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    const double hs = h0 + h1;
    sum += hs / 6.0 *
           ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
  }
  if (paired < intervals) {
    const std::size_t c = n - 1;
    const double h0 = t[c - 1] - t[c - 2];
    const double h1 = t[c] - t[c - 1];
    sum += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[c - 2] +
           h1 * (h1 + 3.0 * h0) / (6.0 * h0) * f[c - 1] +
           h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) * f[c];
  }
  return sum;
}

namespace {

bool uniform_grid(const std::vector<double>& t) {
  const double h = t[1] - t[0];
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (std::abs((t[i + 1] - t[i]) - h) > 1e-9 * std::abs(h)) return false;
  }
  return true;
}

}  // namespace

std::vector<Vec> differentiate_samples(const std::vector<double>& t,
                                       const std::vector<Vec>& y) {
  if (t.size() != y.size()) throw DimensionError("differentiate_samples: length mismatch");
  const std::size_t n = t.size();
  if (n < 3) throw ArgumentError("too few samples for time differences (need at least 3)");
  std::vector<Vec> d(n);
  if (n >= 5 && uniform_grid(t)) {
    const double h = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    const double s = 1.0 / (12.0 * h);
    d[0] = s * (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]);
    d[1] = s * (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]);
    for (std::size_t i = 2; i + 2 < n; ++i) {
      d[i] = s * (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]);
    }
    const std::size_t e = n - 1;
    d[e - 1] = s * (3.0 * y[e] + 10.0 * y[e - 1] - 18.0 * y[e - 2] + 6.0 * y[e - 3] - y[e - 4]);
    d[e] = s * (25.0 * y[e] - 48.0 * y[e - 1] + 36.0 * y[e - 2] - 16.0 * y[e - 3] + 3.0 * y[e - 4]);
    return d;
  }
  {
    const double h0 = t[1] - t[0];
    const double h1 = t[2] - t[1];
    d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y[0] + (h0 + h1) / (h0 * h1) * y[1] -
           h0 / (h1 * (h0 + h1)) * y[2];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    d[i] = -h1 / (h0 * (h0 + h1)) * y[i - 1] + (h1 - h0) / (h0 * h1) * y[i] +
           h0 / (h1 * (h0 + h1)) * y[i + 1];
  }
  {
    const std::size_t e = n - 1;
    const double h0 = t[e - 1] - t[e - 2];
    const double h1 = t[e] - t[e - 1];
    d[e] = h1 / (h0 * (h0 + h1)) * y[e - 2] - (h0 + h1) / (h0 * h1) * y[e - 1] +
           (2.0 * h1 + h0) / (h1 * (h0 + h1)) * y[e];
  }
  return d;
}

Mat null_space(const Mat& a, Eigen::Index cols, double rel_tol) {
  if (a.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * smax && s[i] > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

int numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * s[0] && s[i] > 0.0) ++rank;
  }
  return rank;
}

double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void for_each_index(Execution exec, int count, const std::function<void(int)>& body) {
  if (exec == Execution::kSerial) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int available_threads() { return omp_get_max_threads(); }

}  // namespace dirac
