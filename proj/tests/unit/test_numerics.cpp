#include <doctest.h>

#include "dirac/newton.hpp"
#include "dirac/numerics.hpp"

#include <atomic>
#include <cmath>

using namespace dirac;

TEST_CASE("box containment and stencil fitting") {
  const Box box = Box::cube(2, 1.0);
  CHECK(box.contains(Vec{{0.5, -0.5}}));
  CHECK_FALSE(box.contains(Vec{{1.0, 0.0}}));
  CHECK(Box{}.contains(Vec{{1e9, -1e9}}));
  CHECK(box.fit_step(Vec{{0.9, 0.0}}, 0, 0.5) <= 0.1);
  CHECK(box.fit_step(Vec{{0.0, 0.0}}, 0, 0.01) == doctest::Approx(0.01));
}

TEST_CASE("central differences on smooth functions") {
  const auto f = [](const Vec& x) { return std::sin(x[0]) * std::exp(x[1]); };
  const Vec x{{0.3, -0.2}};
  const Vec g = gradient_fd(f, x);
  CHECK(g[0] == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(std::sin(0.3) * std::exp(-0.2)).epsilon(1e-9));

  const auto F = [](const Vec& x) -> Vec { return Vec{{x[0] * x[1], x[0] * x[0]}}; };
  const Mat J = jacobian_fd(F, x);
  CHECK(J(0, 0) == doctest::Approx(-0.2));
  CHECK(J(0, 1) == doctest::Approx(0.3));
  CHECK(J(1, 0) == doctest::Approx(0.6));
  CHECK(std::abs(J(1, 1)) < 1e-10);
}

TEST_CASE("simpson is exact for quadratics on uneven grids") {
  std::vector<double> t{0.0, 0.1, 0.35, 0.5, 0.9, 1.0};
  std::vector<double> f;
  for (double s : t) f.push_back(3 * s * s - 2 * s + 1);
  CHECK(simpson(t, f) == doctest::Approx(1.0).epsilon(1e-13));
  t.pop_back();
  f.pop_back();
  CHECK(simpson(t, f) == doctest::Approx(0.729 - 0.81 + 0.9).epsilon(1e-13));
}

TEST_CASE("simpson converges at fourth order on uniform grids") {
  const auto err = [](int n) {
    std::vector<double> t, f;
    for (int i = 0; i <= n; ++i) {
      t.push_back(static_cast<double>(i) / n);
      f.push_back(std::exp(t.back()));
    }
    return std::abs(simpson(t, f) - (std::exp(1.0) - 1.0));
  };
  CHECK(std::log2(err(16) / err(32)) > 3.8);
}

TEST_CASE("sample differentiation reaches fourth order on uniform grids") {
  const auto err = [](int n) {
    std::vector<double> t;
    std::vector<Vec> y;
    for (int i = 0; i <= n; ++i) {
      t.push_back(static_cast<double>(i) / n);
      y.push_back(Vec::Constant(1, std::sin(2.0 * t.back())));
    }
    const auto d = differentiate_samples(t, y);
    double e = 0.0;
    for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(d[i][0] - 2.0 * std::cos(2.0 * t[i])));
    return e;
  };
  const double e1 = err(20);
  const double e2 = err(40);
  CHECK(std::log2(e1 / e2) > 3.5);
  CHECK_THROWS_AS(differentiate_samples({0.0, 1.0}, {Vec::Zero(1), Vec::Zero(1)}), ArgumentError);
}

TEST_CASE("null space and rank") {
  Mat a(1, 3);
  a << 1.0, -1.0, 0.0;
  const Mat k = null_space(a, 3);
  CHECK(k.cols() == 2);
  CHECK((a * k).norm() < 1e-14);
  CHECK(numerical_rank(a) == 1);
  CHECK(null_space(Mat(0, 3), 3).cols() == 3);
}

TEST_CASE("parallel index loop matches the serial one and rethrows the lowest failure") {
  std::vector<double> a(257), b(257);
  const auto body = [](std::vector<double>& out) {
    return [&out](int i) { out[static_cast<std::size_t>(i)] = std::sin(0.1 * i) * i; };
  };
  for_each_index(Execution::kSerial, 257, body(a));
  for_each_index(Execution::kParallel, 257, body(b));
  CHECK(a == b);

  try {
    for_each_index(Execution::kParallel, 100, [](int i) {
      if (i == 17 || i == 60) throw SolverError("item " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()) == "item 17");
  }
  CHECK(available_threads() >= 1);
}

TEST_CASE("chord Newton converges to round-off and reports failures") {
  const auto f = [](const Vec& z) -> Vec {
    return Vec{{z[0] * z[0] + z[1] * z[1] - 4.0, z[0] - z[1]}};
  };
  const NewtonResult r = newton_solve(f, Vec{{1.0, 0.5}});
  CHECK(r.z[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(r.residual < 1e-12);
  CHECK(r.iterations <= 50);

  const auto no_root = [](const Vec& z) -> Vec { return Vec{{z[0] * z[0] + 1.0}}; };
  CHECK_THROWS_AS(newton_solve(no_root, Vec{{0.3}}), SolverError);
}
