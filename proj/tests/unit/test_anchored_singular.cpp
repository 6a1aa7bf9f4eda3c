#include <doctest.h>

#include "dirac/anchored_singular.hpp"
#include "dirac/scenarios.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace dirac;

namespace {

SingularLagrangian heisenberg() { return build_left_invariant_group(heisenberg_frame(), Mat::Identity(2, 2)); }

double heis_h(const Vec& q, const Vec& p) {
  const double a = p[0] - 0.5 * q[1] * p[2];
  const double b = p[1] + 0.5 * q[0] * p[2];
  return 0.5 * (a * a + b * b);
}

// Hand-written Hamilton equations of the Heisenberg h, state (x, y, z, px, py, pz).
using State6 = std::array<double, 6>;

State6 heis_field(const State6& s) {
  const double a = s[3] - 0.5 * s[1] * s[5];
  const double b = s[4] + 0.5 * s[0] * s[5];
  return {a, b, 0.5 * (s[0] * b - s[1] * a), -0.5 * s[5] * b, 0.5 * s[5] * a, 0.0};
}

State6 heis_oracle(State6 s, double T, int steps) {
  const double h = T / steps;
  const auto axpy = [](const State6& x, double c, const State6& k) {
    State6 r;
    for (int i = 0; i < 6; ++i) r[i] = x[i] + c * k[i];
    return r;
  };
  for (int i = 0; i < steps; ++i) {
    const State6 k1 = heis_field(s);
    const State6 k2 = heis_field(axpy(s, 0.5 * h, k1));
    const State6 k3 = heis_field(axpy(s, 0.5 * h, k2));
    const State6 k4 = heis_field(axpy(s, h, k3));
    for (int j = 0; j < 6; ++j) s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return s;
}

double max_row(const std::vector<PontryaginRows>& rows, double PontryaginRows::*field) {
  double m = 0.0;
  for (const PontryaginRows& r : rows) m = std::max(m, r.*field);
  return m;
}

}  // namespace

TEST_CASE("control Hamiltonian") {
  const SingularLagrangian heis = heisenberg();
  const Vec origin = Vec::Zero(3);
  const Vec p{{1.0, 0.0, 1.0}};
  CHECK(control_hamiltonian(heis, origin, Vec{{1.0, 0.0}}, p, 1.0) == doctest::Approx(0.5));
  CHECK(control_hamiltonian(heis, origin, Vec{{1.0, 0.0}}, p, 0.0) == doctest::Approx(1.0));

  const SingularLagrangian flat = SingularLagrangian::quadratic(
      AnchoredBundle(2, 2, [](const Vec&) -> Mat { return Mat::Identity(2, 2); }), Mat::Identity(2, 2));
  const Vec u{{0.4, -1.2}}, q{{2.0, 0.5}};
  CHECK(control_hamiltonian(flat, Vec::Zero(2), u, q, 1.0) == doctest::Approx(q.dot(u) - 0.5 * u.squaredNorm()));
}

TEST_CASE("fibre stationarity solve") {
  const SingularLagrangian heis = heisenberg();
  const Vec u = fibre_stationarity_solve(heis, Vec::Zero(3), Vec{{1.0, 0.0, 1.0}}, Vec{{0.2, 0.2}});
  CHECK((u - Vec{{1.0, 0.0}}).norm() < 1e-12);

  Mat g(2, 2);
  g << 2.0, 0.5, 0.5, 1.0;
  const SingularLagrangian skewed = build_left_invariant_group(heisenberg_frame(), g);
  const Vec x{{0.3, -0.8, 1.1}}, p{{0.7, 0.2, -0.4}};
  const Vec us = fibre_stationarity_solve(skewed, x, p, Vec::Zero(2));
  const Mat rho = skewed.bundle().anchor(x);
  CHECK((us - g.ldlt().solve(rho.transpose() * p)).norm() < 1e-12);
  CHECK((skewed.du(x, us) - rho.transpose() * p).norm() < 1e-10);

  // A non-quadratic fibre Lagrangian needs the Newton iteration.
  SingularLagrangian quartic(AnchoredBundle(2, 2, [](const Vec&) -> Mat { return Mat::Identity(2, 2); }),
                             [](const Vec&, const Vec& w) { return 0.5 * w.squaredNorm() + 0.25 * std::pow(w.squaredNorm(), 2); });
  const Vec pq{{1.5, -0.5}};
  const Vec uq = fibre_stationarity_solve(quartic, Vec::Zero(2), pq, pq);
  CHECK((uq * (1.0 + uq.squaredNorm()) - pq).norm() < 1e-8);
}

TEST_CASE("reduced Hamiltonian formula and homogeneity") {
  const SingularLagrangian heis = heisenberg();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 25; ++i) {
    const Vec q{{d(rng), d(rng), d(rng)}}, p{{d(rng), d(rng), d(rng)}};
    const double h = reduced_hamiltonian(heis, q, p);
    CHECK(h == doctest::Approx(heis_h(q, p)).epsilon(1e-12));
    for (double lam : {2.0, -0.5, 7.0}) {
      CHECK(std::abs(reduced_hamiltonian(heis, q, lam * p) - lam * lam * h) <= 1e-10 * std::abs(lam * lam * h) + 1e-300);
    }
  }
  const SingularLagrangian flat = SingularLagrangian::quadratic(
      AnchoredBundle(3, 3, [](const Vec&) -> Mat { return Mat::Identity(3, 3); }), Mat::Identity(3, 3));
  const Vec p{{1.0, 2.0, -2.0}};
  CHECK(reduced_hamiltonian(flat, Vec::Zero(3), p) == doctest::Approx(4.5));
}

TEST_CASE("Hamiltonian vector field") {
  const SingularLagrangian flat = SingularLagrangian::quadratic(
      AnchoredBundle(2, 2, [](const Vec&) -> Mat { return Mat::Identity(2, 2); }), Mat::Identity(2, 2));
  const PhaseVelocity f = hamiltonian_vector_field(flat, Vec{{1.0, 1.0}}, Vec{{0.3, -0.2}});
  CHECK((f.xdot - Vec{{0.3, -0.2}}).norm() < 1e-14);
  CHECK(f.pdot.norm() < 1e-14);

  const SingularLagrangian heis = heisenberg();
  const PhaseVelocity g = hamiltonian_vector_field(heis, Vec{{0.5, -1.0, 2.0}}, Vec{{0.4, 0.9, 0.0}});
  CHECK((g.xdot.head(2) - Vec{{0.4, 0.9}}).norm() < 1e-14);
  CHECK(g.pdot.norm() < 1e-14);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    const Vec q{{d(rng), d(rng), d(rng)}}, p{{d(rng), d(rng), d(rng)}};
    const PhaseVelocity v = hamiltonian_vector_field(heis, q, p);
    State6 s{q[0], q[1], q[2], p[0], p[1], p[2]};
    const State6 want = heis_field(s);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(v.xdot[j] - want[j]) < 1e-12);
      CHECK(std::abs(v.pdot[j] - want[3 + j]) < 1e-12);
    }
    // dh/dx . xdot + dh/dp . pdot = 0 with central differences of h.
    const double e = 1e-5;
    double rate = 0.0;
    for (int j = 0; j < 3; ++j) {
      Vec dq = Vec::Zero(3);
      dq[j] = e;
      rate += (heis_h(q + dq, p) - heis_h(q - dq, p)) / (2 * e) * v.xdot[j];
      rate += (heis_h(q, p + dq) - heis_h(q, p - dq)) / (2 * e) * v.pdot[j];
    }
    CHECK(std::abs(rate) < 1e-8);
  }
}

TEST_CASE("Heisenberg extremals with zero vertical momentum are lines obeying the area rule") {
  const SingularLagrangian heis = heisenberg();
  const Vec x0{{0.2, -0.1, 0.3}}, p0{{0.8, 0.6, 0.0}};
  const Trajectory traj = integrate_normal_extremal(heis, x0, p0, 1.0, 1e-2);
  CHECK(traj.normal);
  CHECK(traj.kind == TrajectoryKind::kNormalExtremal);
  double dev = 0.0;
  for (const MechState& s : traj.states) {
    const Vec line = x0.head(2) + s.t * p0.head(2);
    dev = std::max(dev, (s.x.head(2) - line).norm());
    // z' = (x y' - y x') / 2 integrates exactly along a line.
    const double z = x0[2] + 0.5 * s.t * (x0[0] * p0[1] - x0[1] * p0[0]);
    CHECK(std::abs(s.x[2] - z) < 1e-12);
  }
  CHECK(dev <= 1e-8);
}

TEST_CASE("Heisenberg extremals agree with a hundredfold refinement") {
  const SingularLagrangian heis = heisenberg();
  const Vec x0 = Vec::Zero(3), p0{{1.0, 0.0, 2.0 * M_PI}};
  const double dt = 1e-2;
  const Trajectory traj = integrate_normal_extremal(heis, x0, p0, 1.0, dt);
  const State6 fine = heis_oracle({0, 0, 0, p0[0], p0[1], p0[2]}, 1.0, 10000);
  const MechState& end = traj.states.back();
  CHECK(end.t == doctest::Approx(1.0));
  double gap = 0.0;
  for (int j = 0; j < 3; ++j) {
    gap = std::max(gap, std::abs(end.x[j] - fine[j]));
    gap = std::max(gap, std::abs(end.p[j] - fine[3 + j]));
  }
  CHECK(gap <= 1e-6);
  // p_z = 2 pi closes the projected circle after unit time.
  CHECK(std::abs(fine[0]) < 1e-10);
  CHECK(std::abs(fine[1]) < 1e-10);
  CHECK(fine[2] == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-10));
}

TEST_CASE("h is conserved along extremals") {
  const SingularLagrangian heis = heisenberg();
  const Trajectory traj = integrate_normal_extremal(heis, Vec{{0.1, 0.4, -0.2}}, Vec{{0.5, -1.0, 3.0}}, 1.0, 1e-3);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(std::abs(traj.energy[i] - traj.energy.front()) <= 1e-8);
    CHECK(traj.constraint_residual[i] <= 1e-10);
  }
  CHECK(traj.energy.front() == doctest::Approx(heis_h(Vec{{0.1, 0.4, -0.2}}, Vec{{0.5, -1.0, 3.0}})));
}

TEST_CASE("fibre basis changes leave extremals unchanged") {
  const SingularLagrangian heis = heisenberg();
  Mat s(2, 2);
  s << 2.0, 1.0, -0.5, 1.5;
  const SingularLagrangian re = heis.reparametrized(s);
  const Vec x0{{0.3, 0.0, 0.1}}, p0{{0.2, 1.1, -1.7}};
  const Trajectory a = integrate_normal_extremal(heis, x0, p0, 1.0, 1e-2);
  const Trajectory b = integrate_normal_extremal(re, x0, p0, 1.0, 1e-2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.states[i].x - b.states[i].x).norm() <= 1e-9);
    CHECK((a.states[i].p - b.states[i].p).norm() <= 1e-9);
    CHECK((a.controls[i] - s * b.controls[i]).norm() <= 1e-9);
  }
}

TEST_CASE("backward flow returns to the start") {
  const SingularLagrangian heis = heisenberg();
  const Vec x0{{-0.4, 0.2, 0.5}}, p0{{1.0, 0.3, 4.0}};
  const PhasePoint fwd = flow_normal_extremal(heis, x0, p0, 1.0, 1e-2);
  const PhasePoint back = flow_normal_extremal(heis, fwd.x, fwd.p, -1.0, 1e-2);
  CHECK((back.x - x0).norm() <= 1e-6);
  CHECK((back.p - p0).norm() <= 1e-6);
}

TEST_CASE("Pontryagin residuals") {
  const SingularLagrangian heis = heisenberg();
  const Trajectory traj = integrate_normal_extremal(heis, Vec::Zero(3), Vec{{0.6, -0.8, 1.5}}, 1.0, 1e-3);
  const std::vector<PontryaginRows> rows = pontryagin_residual(heis, traj, 1.0);
  CHECK(max_row(rows, &PontryaginRows::state) <= 1e-6);
  CHECK(max_row(rows, &PontryaginRows::costate) <= 1e-6);
  CHECK(max_row(rows, &PontryaginRows::stationarity) <= 1e-6);
  CHECK(traj.states.back().p.norm() > 1e-10);

  // A straight line whose costate disagrees with its control.
  Trajectory wrong = traj;
  for (std::size_t i = 0; i < wrong.size(); ++i) {
    wrong.states[i].x = Vec{{wrong.states[i].t, 0.0, 0.0}};
    wrong.states[i].p = Vec{{0.2, 0.5, 0.0}};
    wrong.controls[i] = Vec{{1.0, 0.0}};
  }
  CHECK(max_row(pontryagin_residual(heis, wrong, 1.0), &PontryaginRows::stationarity) > 1e-2);

  // Abnormal witness: rest point with p annihilating the image of the anchor.
  Trajectory rest = traj;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    rest.states[i].x = Vec::Zero(3);
    rest.states[i].p = Vec{{0.0, 0.0, 1.0}};
    rest.controls[i] = Vec::Zero(2);
  }
  const std::vector<PontryaginRows> ab = pontryagin_residual(heis, rest, 0.0);
  CHECK(max_row(ab, &PontryaginRows::state) <= 1e-10);
  CHECK(max_row(ab, &PontryaginRows::costate) <= 1e-10);
  CHECK(max_row(ab, &PontryaginRows::stationarity) <= 1e-10);
}

TEST_CASE("errors and validation") {
  const SingularLagrangian heis = heisenberg();
  CHECK_THROWS_AS(integrate_normal_extremal(heis, Vec::Zero(3), Vec::Zero(3), 1.0, 1e-2), ArgumentError);

  Mat indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(build_left_invariant_group(heisenberg_frame(), indefinite), InvariantError);

  std::mt19937_64 rng(3);
  AnchoredBundle bundle(3, 2, heisenberg_frame().frame);
  CHECK(bundle.validate(rng, 10, 2) == 2);
  CHECK_THROWS_AS(bundle.validate(rng, 10, 3), InvariantError);

  // Half-plane cone u_1 > 0: a rotating control leaves it.
  AnchoredBundle half(3, 2, heisenberg_frame().frame);
  half.with_derivative(heisenberg_frame().derivative).with_cone([](const Vec& u) { return u[0] > 0.0; });
  const SingularLagrangian cone = SingularLagrangian::quadratic(half, Mat::Identity(2, 2));
  CHECK_THROWS_AS(fibre_stationarity_solve(cone, Vec::Zero(3), Vec{{1.0, 0.0, 0.0}}, Vec{{-1.0, 0.0}}), DomainError);
  CHECK_NOTHROW(integrate_normal_extremal(cone, Vec::Zero(3), Vec{{1.0, 0.0, 1.0}}, 1.0, 1e-2));
  CHECK_THROWS_AS(integrate_normal_extremal(cone, Vec::Zero(3), Vec{{1.0, 0.0, 6.0}}, 1.0, 1e-2), DomainError);
}
