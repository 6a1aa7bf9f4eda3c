#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirac {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched sizes between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Evaluation point outside a declared domain, or a stencil that cannot fit.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Model data violating a structural requirement (skewness, rank, positivity).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Newton non-convergence, singular systems, blow-up.
class SolverError : public Error {
 public:
  using Error::Error;
};

// File or stream failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Caller-side precondition violations not covered above.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Axis-aligned open box; default-constructed boxes are unbounded.
struct Box {
  Vec lo;
  Vec hi;

  static Box unbounded() { return {}; }
  static Box cube(int n, double radius);

  bool bounded() const { return lo.size() > 0; }
  bool contains(const Vec& x) const;
  // Largest step not exceeding h such that x +/- step*e_i stays inside.
  double fit_step(const Vec& x, int i, double h) const;
};

void require_same_size(const Vec& a, const Vec& b, const char* what);
void require_size(const Vec& a, Eigen::Index n, const char* what);

double first_derivative_step(double xi);
double second_derivative_step(double scale);

Vec gradient_fd(const std::function<double(const Vec&)>& f, const Vec& x,
                const Box& box = {}, double step_scale = 1.0);
// J(i,j) = d f_i / d x_j by central differences.
Mat jacobian_fd(const std::function<Vec(const Vec&)>& f, const Vec& x,
                const Box& box = {}, double step_scale = 1.0);

// Composite Simpson on a possibly non-uniform grid; an odd interval count
// closes with a quadratic fit over the last three nodes.
double simpson(const std::vector<double>& t, const std::vector<double>& f);

// Time derivative of sampled data: fourth-order stencils on uniform grids
// with at least five samples, second-order otherwise.
std::vector<Vec> differentiate_samples(const std::vector<double>& t,
                                       const std::vector<Vec>& y);

// Orthonormal basis of ker(A) (columns), from a full SVD with relative tolerance.
Mat null_space(const Mat& a, Eigen::Index cols, double rel_tol = 1e-10);
int numerical_rank(const Mat& a, double rel_tol = 1e-10);

double inf_norm(const Vec& v);

enum class Execution { kSerial, kParallel };

// Runs body(i) for i in [0, count). The parallel path uses OpenMP; the first
// exception (lowest index) is rethrown after the loop in both paths.
void for_each_index(Execution exec, int count,
                    const std::function<void(int)>& body);

int available_threads();

}  // namespace dirac
