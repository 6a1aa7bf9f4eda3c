#include <doctest.h>

#include "dirac/conic_finsler.hpp"
#include "dirac/scenarios.hpp"

#include <cmath>
#include <random>

using namespace dirac;

namespace {

// Closed-form fundamental tensor of sqrt(u^T G u) + xi . u.
Mat randers_g_oracle(const Mat& G, const Vec& xi, const Vec& u) {
  const double a = std::sqrt(u.dot(G * u));
  const double F = a + xi.dot(u);
  const Vec l = G * u / a;
  return F / a * (G - l * l.transpose()) + (l + xi) * (l + xi).transpose();
}

AnchoredBundle flat_bundle(int n) {
  return AnchoredBundle(n, n, [n](const Vec&) -> Mat { return Mat::Identity(n, n); });
}

Lift sampled_lift(int samples, double t0, double t1, const std::function<Vec(double)>& x,
                  const std::function<Vec(double)>& xdot) {
  Lift lift;
  for (int i = 0; i < samples; ++i) {
    const double t = t0 + (t1 - t0) * i / (samples - 1);
    lift.t.push_back(t);
    lift.x.push_back(x(t));
    lift.u.push_back(xdot(t));
  }
  return lift;
}

Lift wavy_lift(int samples) {
  return sampled_lift(
      samples, 0.0, 1.0, [](double t) { return Vec{{std::sin(2 * t), t + 0.3 * t * t * t}}; },
      [](double t) { return Vec{{2 * std::cos(2 * t), 1 + 0.9 * t * t}}; });
}

}  // namespace

TEST_CASE("Euclidean fundamental tensor is the identity form") {
  const ConicMinkowskiNorm e = euclidean_norm(3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int i = 0; i < 20; ++i) {
    const Vec u{{n(rng), n(rng), n(rng)}}, v{{n(rng), n(rng), n(rng)}}, w{{n(rng), n(rng), n(rng)}};
    CHECK(hessian_g(e, u, v, w) == doctest::Approx(v.dot(w)).epsilon(1e-12));
    CHECK(std::abs(hessian_g_fd(e, u, v, w) - v.dot(w)) < 1e-7 * v.norm() * w.norm());
  }
  CHECK_THROWS_AS(e.value(Vec::Zero(3)), DomainError);
}

TEST_CASE("Randers norm values and tensor") {
  const ConicMinkowskiNorm r = randers_norm(Mat::Identity(2, 2), Vec{{0.5, 0.0}});
  CHECK(r(Vec{{1.0, 0.0}}) == doctest::Approx(1.5));
  CHECK(r(Vec{{-1.0, 0.0}}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(randers_norm(Mat::Identity(2, 2), Vec{{1.2, 0.0}}), InvariantError);
  CHECK_THROWS_AS(randers_norm(Mat::Identity(2, 2), Vec{{1.0, 0.0}}), InvariantError);
  Mat notspd(2, 2);
  notspd << 1, 2, 2, 1;
  CHECK_THROWS_AS(randers_norm(notspd, Vec::Zero(2)), InvariantError);

  Mat G(3, 3);
  G << 2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 1.5;
  const Vec xi{{0.2, -0.3, 0.4}};
  const ConicMinkowskiNorm rg = randers_norm(G, xi);
  const ConicMinkowskiNorm plain = randers_norm(G, Vec::Zero(3));
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n;
  for (int i = 0; i < 30; ++i) {
    const Vec u{{n(rng), n(rng), n(rng)}};
    const Mat want = randers_g_oracle(G, xi, u);
    CHECK((rg.hessian(u) - want).norm() < 1e-12 * want.norm());
    const Vec v{{n(rng), n(rng), n(rng)}}, w{{n(rng), n(rng), n(rng)}};
    CHECK(std::abs(hessian_g_fd(rg, u, v, w) - v.dot(want * w)) < 1e-6 * v.norm() * w.norm() * want.norm());
    CHECK(plain(u) == doctest::Approx(std::sqrt(u.dot(G * u))).epsilon(1e-14));
    CHECK(rg(2.5 * u) == doctest::Approx(2.5 * rg(u)).epsilon(1e-14));
  }
}

TEST_CASE("Minkowski property probes") {
  Mat G(2, 2);
  G << 1.0, 0.4, 0.4, 2.0;
  for (const ConicMinkowskiNorm& norm :
       {euclidean_norm(4), randers_norm(Mat::Identity(2, 2), Vec{{0.5, 0.0}}), randers_norm(G, Vec{{0.3, -0.6}})}) {
    const MinkowskiProbeReport a = minkowski_property_probe(norm, 500, 99, Execution::kSerial);
    const MinkowskiProbeReport b = minkowski_property_probe(norm, 500, 99, Execution::kParallel);
    CHECK(a.pass(1e-8));
    CHECK(a.probes == 500);
    CHECK(a.min_positivity > 0.0);
    CHECK(a.min_eigenvalue > 0.0);
    CHECK(a.worst() == b.worst());
    CHECK(a.polarization == b.polarization);
  }

  // Finite-difference Hessian path: strip the analytic derivatives.
  const ConicMinkowskiNorm analytic = randers_norm(G, Vec{{0.3, -0.6}});
  const ConicMinkowskiNorm bare(2, [analytic](const Vec& u) { return analytic(u); });
  const MinkowskiProbeReport fd = minkowski_property_probe(bare, 200, 7);
  CHECK(fd.homogeneity <= 1e-12);
  CHECK(fd.hessian_scaling <= 1e-6);
  CHECK(fd.hessian_diagonal <= 1e-6);

  // A norm that is not homogeneous fails the probe.
  const ConicMinkowskiNorm wrong(2, [](const Vec& u) { return u.squaredNorm(); });
  CHECK_FALSE(minkowski_property_probe(wrong, 50, 3).pass());
}

TEST_CASE("energy and length of simple lifts") {
  const ConicFinslerStructure flat = ConicFinslerStructure::riemannian(flat_bundle(2), Mat::Identity(2, 2));
  const Vec dir{{0.6, 0.8}};
  for (double s : {1.0, 2.5}) {
    for (double T : {1.0, 3.0}) {
      const Lift l = sampled_lift(
          21, 0.0, T, [&](double t) -> Vec { return s * t * dir; }, [&](double) -> Vec { return s * dir; });
      CHECK(energy_of_lift(flat, l) == doctest::Approx(0.5 * s * s * T).epsilon(1e-14));
      CHECK(length_of_lift(flat, l) == doctest::Approx(s * T).epsilon(1e-14));
    }
  }

  const double e1 = energy_of_lift(flat, wavy_lift(33));
  const double e2 = energy_of_lift(flat, wavy_lift(65));
  const double e3 = energy_of_lift(flat, wavy_lift(129));
  CHECK(std::log2(std::abs(e1 - e2) / std::abs(e2 - e3)) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("length is parametrization invariant and bounded by energy") {
  const ConicFinslerStructure rs = randers_plane(0.3);
  const Lift base = wavy_lift(401);
  // Same curve with t = (s + s^2) / 2 on [0, 1].
  const Lift re = sampled_lift(
      401, 0.0, 1.0,
      [](double s) {
        const double t = 0.5 * (s + s * s);
        return Vec{{std::sin(2 * t), t + 0.3 * t * t * t}};
      },
      [](double s) -> Vec {
        const double t = 0.5 * (s + s * s);
        return Vec{{2 * std::cos(2 * t), 1 + 0.9 * t * t}} * (0.5 + s);
      });
  const double L = length_of_lift(rs, base);
  CHECK(length_of_lift(rs, re) == doctest::Approx(L).epsilon(1e-6));
  CHECK(L * L <= 2.0 * energy_of_lift(rs, base));
  CHECK(L * L < 2.0 * energy_of_lift(rs, re) - 1e-3);

  const Lift cs = constant_speed_reparametrize(rs, base);
  REQUIRE(cs.t.size() == base.t.size());
  CHECK(cs.t.front() == base.t.front());
  CHECK(cs.t.back() == base.t.back());
  const double Lc = length_of_lift(rs, cs);
  CHECK(Lc == doctest::Approx(L).epsilon(1e-8));
  CHECK(std::abs(2.0 * energy_of_lift(rs, cs) - Lc * Lc) < 1e-8 * Lc * Lc);
  for (std::size_t i = 0; i < cs.t.size(); ++i) CHECK(std::abs(rs.F(cs.x[i], cs.u[i]) - Lc) <= 1e-6);
}

TEST_CASE("quadratically parametrized segment becomes uniform") {
  const ConicFinslerStructure flat = ConicFinslerStructure::riemannian(flat_bundle(2), Mat::Identity(2, 2));
  const Lift seg = sampled_lift(
      51, 0.0, 1.0, [](double t) { return Vec{{t + t * t, 0.0}}; }, [](double t) { return Vec{{1 + 2 * t, 0.0}}; });
  CHECK(length_of_lift(flat, seg) == doctest::Approx(2.0).epsilon(1e-14));
  const Lift cs = constant_speed_reparametrize(flat, seg);
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    CHECK(std::abs(cs.x[i][0] - 2.0 * cs.t[i]) <= 1e-6);
    CHECK(std::abs(cs.u[i][0] - 2.0) <= 1e-6);
  }

  const Lift again = constant_speed_reparametrize(flat, cs);
  for (std::size_t i = 0; i < cs.t.size(); ++i) CHECK((again.x[i] - cs.x[i]).norm() <= 1e-8);

  Lift stalled = seg;
  for (Vec& u : stalled.u) u.setZero();
  CHECK_THROWS(constant_speed_reparametrize(flat, stalled));
}

TEST_CASE("normal geodesics") {
  const ConicFinslerStructure flat = ConicFinslerStructure::riemannian(flat_bundle(2), Mat::Identity(2, 2));
  const Trajectory line = normal_geodesic(flat, Vec{{1.0, -1.0}}, Vec{{0.3, 0.4}}, 1.0, 0.1);
  CHECK(line.normal);
  for (const MechState& s : line.states) CHECK((s.x - Vec{{1.0 + 0.3 * s.t, -1.0 + 0.4 * s.t}}).norm() < 1e-13);

  // Constant wind: momentum is conserved, so the path is a line at the Legendre-dual velocity.
  Mat G(2, 2);
  G << 1.0, 0.2, 0.2, 1.5;
  const Vec xi{{0.3, -0.1}};
  const ConicFinslerStructure cw = randers_constant(G, xi);
  const Vec p0{{1.0, 0.5}};
  const Trajectory ct = normal_geodesic(cw, Vec::Zero(2), p0, 1.0, 0.05);
  const Vec u = ct.controls.front();
  const Mat g = randers_g_oracle(G, xi, u);
  CHECK((g * u - p0).norm() < 1e-10);
  for (const MechState& s : ct.states) {
    CHECK((s.p - p0).norm() < 1e-12);
    CHECK((s.x - s.t * u).norm() < 1e-12);
  }

  const ConicFinslerStructure rs = randers_plane(0.4);
  const Vec x0{{0.2, -0.5}}, q0{{0.7, 1.1}};
  const Trajectory coarse = normal_geodesic(rs, x0, q0, 1.0, 1e-2);
  const Trajectory fine = normal_geodesic(rs, x0, q0, 1.0, 1e-4);
  CHECK((coarse.states.back().x - fine.states.back().x).norm() <= 1e-6);
  CHECK((coarse.states.back().p - fine.states.back().p).norm() <= 1e-6);

  const Trajectory run = normal_geodesic(rs, x0, q0, 1.0, 1e-3);
  const double F0 = rs.F(run.states.front().x, run.controls.front());
  for (std::size_t i = 0; i < run.size(); ++i) {
    CHECK(std::abs(run.energy[i] - run.energy.front()) <= 1e-8);
    CHECK(std::abs(rs.F(run.states[i].x, run.controls[i]) - F0) <= 1e-8);
  }
  CHECK(run.energy.front() == doctest::Approx(0.5 * F0 * F0).epsilon(1e-10));
}

TEST_CASE("structure validation") {
  const MinkowskiProbeReport rep = randers_plane(0.5).validate(21, 10, 40);
  CHECK(rep.pass(1e-6));
  CHECK_THROWS_AS(randers_plane(0.8), InvariantError);

  const ConicFinslerStructure broken(flat_bundle(2), [](const Vec& x) {
    return ConicMinkowskiNorm(2, [x](const Vec& u) { return u.norm() * (1.0 + x[0] * u[0] * u[0]); });
  });
  CHECK_THROWS_AS(broken.validate(21, 5, 20), InvariantError);
}
