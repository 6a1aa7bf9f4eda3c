#include <doctest.h>

#include "dirac/conic_finsler.hpp"
#include "dirac/implicit_mechanics.hpp"
#include "dirac/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace dirac;

namespace {

LcNetlist single_branch() {
  return {Vec::Ones(1), Vec::Ones(1), Mat(0, 1)};
}

LcNetlist loop_net() {
  Mat kcl(1, 2);
  kcl << 1, -1;
  return {Vec{{1.0, 2.0}}, Vec{{1.0, 0.5}}, kcl};
}

MechState state(const Vec& x, const Vec& v) {
  MechState s;
  s.x = x;
  s.v = v;
  return s;
}

Trajectory analytic_oscillator(double dt, double T) {
  Trajectory traj;
  for (int i = 0; i * dt <= T + 1e-12; ++i) {
    MechState s;
    s.t = i * dt;
    s.x = Vec::Constant(1, std::cos(s.t));
    s.v = Vec::Constant(1, -std::sin(s.t));
    traj.states.push_back(s);
  }
  return traj;
}

MechState vertical_rope(int nodes) {
  MechState s;
  s.x = Vec::Zero(2 * (nodes + 1));
  for (int j = 0; j <= nodes; ++j) s.x[2 * j + 1] = -static_cast<double>(j) / nodes;
  s.v = Vec::Zero(s.x.size());
  return s;
}

}  // namespace

TEST_CASE("Legendre map examples") {
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(2, 2), Mat::Zero(2, 2));
  CHECK(legendre(free, Vec::Zero(2), Vec{{3.0, 4.0}}) == Vec{{3.0, 4.0}});

  const MechanicalSystem lc = build_lc_circuit(loop_net());
  CHECK(legendre(lc.lm, Vec{{0.3, 0.1}}, Vec{{1.0, 1.0}}) == Vec{{1.0, 2.0}});

  const ConicMinkowskiNorm randers = randers_norm(Mat::Identity(2, 2), Vec{{0.5, 0.0}});
  const LagrangianModel half_f2(2, [randers](const Vec&, const Vec& v) {
    const double f = randers.value(v);
    return 0.5 * f * f;
  });
  for (const Vec& v : {Vec{{1.0, 0.0}}, Vec{{-0.3, 0.8}}, Vec{{2.0, -1.5}}}) {
    const double a = v.norm();
    const double f = a + 0.5 * v[0];
    const Vec oracle = f * (v / a + Vec{{0.5, 0.0}});
    CHECK((legendre(half_f2, Vec::Zero(2), v) - oracle).norm() < 1e-6);
  }
}

TEST_CASE("inverse Legendre map") {
  Mat m(2, 2);
  m << 2, 0.5, 0.5, 1;
  const LagrangianModel quad = LagrangianModel::quadratic(m, Mat::Zero(2, 2));
  const Vec v0{{0.7, -1.1}};
  CHECK((legendre_inverse(quad, Vec::Zero(2), m * v0, Vec::Zero(2)) - v0).norm() < 1e-12);

  const MechanicalSystem heis = build_heisenberg_particle();
  const LagrangianModel quartic(3, [](const Vec& x, const Vec& v) {
    return 0.5 * v.squaredNorm() * (1.0 + 0.1 * x[0] * x[0]) + 0.25 * std::pow(v.squaredNorm(), 2);
  });
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Vec q{{u(rng), u(rng), u(rng)}};
    const Mat b = delta_fiber(heis.cd, q).basis();
    const Vec v = b * Vec{{u(rng), u(rng)}};
    const Vec back = legendre_inverse(quartic, heis.cd, q, legendre(quartic, q, v), Vec::Zero(3));
    CHECK((back - v).norm() < 1e-8);
  }

  const LagrangianModel degenerate(2, [](const Vec&, const Vec& v) { return 0.5 * v[0] * v[0]; });
  CHECK_THROWS_AS(legendre_inverse(degenerate, Vec::Zero(2), Vec{{0.0, 1.0}}, Vec::Zero(2)), SolverError);
}

TEST_CASE("generalized energy and Dirac differential") {
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(2, 2), Mat::Zero(2, 2));
  CHECK(generalized_energy(free, Vec::Zero(2), Vec{{3.0, 4.0}}, Vec{{3.0, 4.0}}) == 12.5);
  CHECK(generalized_energy(free, Vec::Zero(2), Vec{{3.0, 4.0}}, Vec::Zero(2)) == -12.5);

  const DiracDifferential df = dirac_differential(free, Vec{{1.0, 2.0}}, Vec{{3.0, 4.0}});
  CHECK(df.p == Vec{{3.0, 4.0}});
  CHECK(df.a.norm() == 0.0);
  CHECK(df.w == Vec{{3.0, 4.0}});

  const MechanicalSystem lc = build_lc_circuit(loop_net());
  const Vec q{{0.4, -0.2}}, v{{1.0, 0.5}};
  const DiracDifferential dl = dirac_differential(lc.lm, q, v);
  CHECK((dl.p - Vec{{1.0, 1.0}}).norm() < 1e-15);
  CHECK((dl.a - Vec{{0.4, -0.4}}).norm() < 1e-15);

  const MechanicalSystem rope = build_heavy_rope(3, rope_default_density, 0.0);
  CHECK(dirac_differential(rope.lm, rope_initial_state(3).x, Vec::Ones(8)).a.norm() == 0.0);
}

TEST_CASE("free particle steps are exact") {
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(2, 2), Mat::Zero(2, 2));
  const Trajectory traj = integrate_implicit_lagrangian(free, ConstraintDistribution::unconstrained(2),
                                                        state(Vec{{1.0, 0.0}}, Vec{{0.5, -2.0}}), 1.0, 0.1);
  REQUIRE(traj.size() == 11);
  for (const MechState& s : traj.states) {
    CHECK((s.x - (Vec{{1.0, 0.0}} + s.t * Vec{{0.5, -2.0}})).norm() < 1e-13);
    CHECK((s.p - Vec{{0.5, -2.0}}).norm() < 1e-13);
  }
}

TEST_CASE("single LC branch follows the cosine") {
  const MechanicalSystem lc = build_lc_circuit(single_branch());
  const Trajectory traj = integrate_implicit_lagrangian(lc.lm, lc.cd, state(Vec::Ones(1), Vec::Zero(1)),
                                                        std::numbers::pi / 2, 1e-3);
  CHECK(traj.states.back().t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  const double q = traj.states.back().x[0];
  CHECK(std::abs(q - std::cos(std::numbers::pi / 2)) < 1e-4);
  CHECK(std::abs(traj.states.back().v[0] + 1.0) < 1e-4);

  const auto err = [&](double dt) {
    const Trajectory t = integrate_implicit_lagrangian(lc.lm, lc.cd, state(Vec::Ones(1), Vec::Zero(1)), 1.0, dt);
    return std::abs(t.states.back().x[0] - std::cos(1.0));
  };
  CHECK(std::log2(err(0.02) / err(0.01)) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("LC loop keeps currents equal") {
  const MechanicalSystem lc = build_lc_circuit(loop_net());
  const Trajectory traj =
      integrate_implicit_lagrangian(lc.lm, lc.cd, state(Vec{{1.0, 0.5}}, Vec::Zero(2)), 1.0, 1e-2);
  for (const MechState& s : traj.states) CHECK(std::abs(s.v[0] - s.v[1]) < 1e-12);
  CHECK(relative_energy_drift(traj) < 1e-12);
}

TEST_CASE("first rope step reproduces the hand-solved multiplier") {
  const int nodes = 4;
  const MechanicalSystem rope = build_heavy_rope(nodes, rope_default_density, 9.81);
  MechState s0 = vertical_rope(nodes);
  s0.p = Vec::Zero(s0.x.size());
  s0.lambda = Vec::Zero(1);
  double sw = 0.0, swr = 0.0;
  for (int j = 0; j <= nodes; ++j) {
    const double w = (j == 0 || j == nodes ? 0.5 : 1.0) / nodes;
    const double rho = rope_default_density(static_cast<double>(j) / nodes);
    sw += w;
    swr += w / rho;
  }
  const double hand = -9.81 * sw / swr;
  const double dt = 1e-4;
  const MechState s1 = step_implicit_lagrangian(rope.lm, rope.cd, s0, dt);
  CHECK(s1.lambda[0] == doctest::Approx(hand).epsilon(1e-3));
  CHECK(std::abs((rope.cd.omega(s1.x) * s1.v)(0)) < 1e-12);
  CHECK(step_dirac_membership(rope.lm, rope.cd, s0, s1).member);
}

TEST_CASE("constrained runs stay on the constraint and in the Dirac structure") {
  const MechanicalSystem heis = build_heisenberg_particle();
  const Trajectory off = integrate_implicit_lagrangian(heis.lm, heis.cd, state(Vec{{1.0, 0.0, 0.0}}, Vec{{0.3, 1.0, 0.0}}), 0.1, 1e-2);
  CHECK_FALSE(off.warnings.empty());
  CHECK(off.constraint_residual.front() <= 1e-10);
  const Trajectory traj = integrate_implicit_lagrangian(heis.lm, heis.cd, state(Vec{{1.0, 0.0, 0.0}}, Vec{{0.3, 1.0, 0.5}}), 1.0, 1e-2);
  CHECK(traj.warnings.empty());
  for (double r : traj.constraint_residual) CHECK(r <= 1e-10);
  for (double r : traj.legendre_residual) CHECK(r <= 1e-10);
  for (double r : traj.dirac_residual) CHECK(r <= 1e-7);

  const MechanicalSystem rope = build_heavy_rope(8, rope_default_density, 9.81);
  const Trajectory rt = integrate_implicit_lagrangian(rope.lm, rope.cd, rope_initial_state(8), 0.3, 1e-2);
  CHECK(rt.warnings.empty());
  for (double r : rt.constraint_residual) CHECK(r <= 1e-9);
  for (double r : rt.dirac_residual) CHECK(r <= 1e-7);
}

TEST_CASE("energy drift is second order") {
  const MechanicalSystem heis = build_heisenberg_particle();
  const MechState init = state(Vec{{1.0, 0.0, 0.0}}, Vec{{0.3, 1.0, 0.5}});
  std::vector<double> drift;
  for (double dt : {0.02, 0.01, 0.005}) {
    drift.push_back(relative_energy_drift(integrate_implicit_lagrangian(heis.lm, heis.cd, init, 1.0, dt)));
  }
  CHECK(std::log2(drift[0] / drift[1]) >= 1.8);
  CHECK(std::log2(drift[1] / drift[2]) >= 1.8);
}

TEST_CASE("unconstrained runs satisfy the Euler-Lagrange equations") {
  const LagrangianModel pend(1, [](const Vec& x, const Vec& v) { return 0.5 * v[0] * v[0] + std::cos(x[0]); });
  const Trajectory traj = integrate_implicit_lagrangian(pend, ConstraintDistribution::unconstrained(1),
                                                        state(Vec::Constant(1, 1.0), Vec::Zero(1)), 1.0, 1e-3);
  const std::vector<double> el = euler_lagrange_residual(pend, traj);
  CHECK(*std::max_element(el.begin(), el.end()) < 1e-5);
}

TEST_CASE("induced Hamiltonian") {
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(3, 3), Mat::Zero(3, 3));
  const Vec p{{1.0, -2.0, 0.5}};
  CHECK(induced_hamiltonian(free, ConstraintDistribution::unconstrained(3), Vec::Zero(3), p) ==
        doctest::Approx(0.5 * p.squaredNorm()));

  const MechanicalSystem lc = build_lc_circuit(loop_net());
  const Vec q{{0.2, 0.3}};
  const Vec v{{0.7, 0.7}};
  const Vec pl = legendre(lc.lm, q, v);
  const double oracle = 0.5 * pl.dot(Vec{{1.0, 0.5}}.cwiseProduct(pl)) + 0.5 * q.dot(Vec{{1.0, 2.0}}.cwiseProduct(q));
  CHECK(induced_hamiltonian(lc.lm, lc.cd, q, pl) == doctest::Approx(oracle).epsilon(1e-12));

  const MechanicalSystem heis = build_heisenberg_particle(0.0, 0.0);
  const Vec x{{0.3, -0.4, 0.1}};
  const Vec pv = legendre(heis.lm, x, delta_fiber(heis.cd, x).basis() * Vec{{0.6, -0.2}});
  CHECK(induced_hamiltonian(heis.lm, heis.cd, x, 3.0 * pv) ==
        doctest::Approx(9.0 * induced_hamiltonian(heis.lm, heis.cd, x, pv)).epsilon(1e-12));
}

TEST_CASE("Hamiltonian and Lagrangian integrators agree") {
  const auto compare = [](const MechanicalSystem& sys, const MechState& init, double T, double dt) {
    const Trajectory lag = integrate_implicit_lagrangian(sys.lm, sys.cd, init, T, dt);
    const MechState& s0 = lag.states.front();
    const Trajectory ham = integrate_implicit_hamiltonian(sys.lm, sys.cd, s0.x, s0.p, T, dt);
    double gap = 0.0;
    for (std::size_t i = 0; i < lag.size(); ++i) {
      gap = std::max({gap, inf_norm(lag.states[i].x - ham.states[i].x), inf_norm(lag.states[i].v - ham.states[i].v),
                      inf_norm(lag.states[i].p - ham.states[i].p)});
    }
    return gap;
  };
  CHECK(compare(build_lc_circuit(single_branch()), state(Vec::Ones(1), Vec::Zero(1)), 1.0, 1e-2) <= 1e-8);
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(2, 2), Mat::Zero(2, 2));
  CHECK(compare({ConstraintDistribution::unconstrained(2), free}, state(Vec::Zero(2), Vec{{1.0, 2.0}}), 1.0, 0.1) <=
        1e-12);
  CHECK(compare(build_heavy_rope(6, rope_default_density, 9.81), rope_initial_state(6), 0.5, 1e-2) <= 1e-8);

  const MechanicalSystem lc = build_lc_circuit(loop_net());
  CHECK_THROWS_AS(integrate_implicit_hamiltonian(lc.lm, lc.cd, Vec::Zero(2), Vec{{1.0, 0.0}}, 1.0, 0.1),
                  ArgumentError);
}

TEST_CASE("multiplier basis does not change trajectories") {
  const MechanicalSystem rope = build_heavy_rope(6, rope_default_density, 9.81);
  const ConstraintDistribution scaled =
      rope.cd.rescaled([](const Vec& x) -> Mat { return Mat::Constant(1, 1, -3.0 * (1.5 + std::tanh(x[3]))); });
  const Trajectory a = integrate_implicit_lagrangian(rope.lm, rope.cd, rope_initial_state(6), 0.3, 1e-2);
  const Trajectory b = integrate_implicit_lagrangian(rope.lm, scaled, rope_initial_state(6), 0.3, 1e-2);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    gap = std::max({gap, inf_norm(a.states[i].x - b.states[i].x), inf_norm(a.states[i].v - b.states[i].v),
                    inf_norm(a.states[i].p - b.states[i].p)});
  }
  CHECK(gap <= 1e-9);
  CHECK(std::abs(a.states[5].lambda[0] - b.states[5].lambda[0]) > 1e-3);
}

TEST_CASE("Euler-Lagrange residual on analytic and perturbed curves") {
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(2, 2), Mat::Zero(2, 2));
  Trajectory line;
  for (int i = 0; i <= 50; ++i) {
    MechState s;
    s.t = 0.02 * i;
    s.x = Vec{{1.0 + 2.0 * s.t, -s.t}};
    s.v = Vec{{2.0, -1.0}};
    line.states.push_back(s);
  }
  for (double r : euler_lagrange_residual(free, line)) CHECK(r <= 1e-10);

  const LagrangianModel osc = LagrangianModel::quadratic(Mat::Identity(1, 1), Mat::Identity(1, 1));
  Trajectory exact = analytic_oscillator(1e-3, 1.0);
  const std::vector<double> r = euler_lagrange_residual(osc, exact);
  CHECK(*std::max_element(r.begin(), r.end()) <= 1e-6);

  for (MechState& s : exact.states) s.v[0] += 0.05 * std::sin(7.0 * s.t);
  const std::vector<double> bad = euler_lagrange_residual(osc, exact);
  CHECK(*std::max_element(bad.begin(), bad.end()) > 1e-2);
}

TEST_CASE("action derivative along fixed-end variations") {
  const LagrangianModel osc = LagrangianModel::quadratic(Mat::Identity(1, 1), Mat::Identity(1, 1));
  SampledCurve curve;
  for (int i = 0; i <= 1000; ++i) {
    curve.t.push_back(1e-3 * i);
    curve.x.push_back(Vec::Constant(1, std::cos(curve.t.back())));
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double a = u(rng), b = u(rng);
    std::vector<Vec> var;
    for (double t : curve.t) var.push_back(Vec::Constant(1, std::sin(std::numbers::pi * t) * (a + b * t)));
    CHECK(std::abs(action_derivative(osc, curve, var)) <= 1e-6);
  }

  std::vector<Vec> bump;
  for (double t : curve.t) bump.push_back(Vec::Constant(1, t * t * (1 - t) * (1 - t)));
  const LagrangianModel free = LagrangianModel::quadratic(Mat::Identity(1, 1), Mat::Zero(1, 1));
  SampledCurve line = curve;
  for (std::size_t i = 0; i < line.t.size(); ++i) line.x[i] = Vec::Constant(1, 2.0 * line.t[i]);
  CHECK(std::abs(action_derivative(free, line, bump)) < 1e-10);

  SampledCurve bent = line;
  for (std::size_t i = 0; i < bent.t.size(); ++i) bent.x[i][0] += bent.t[i] * bent.t[i];
  const double coarse = action_derivative(free, bent, bump);
  SampledCurve fine;
  std::vector<Vec> fine_bump;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 5e-4 * i;
    fine.t.push_back(t);
    fine.x.push_back(Vec::Constant(1, 2.0 * t + t * t));
    fine_bump.push_back(Vec::Constant(1, t * t * (1 - t) * (1 - t)));
  }
  const double refined = action_derivative(free, fine, fine_bump);
  CHECK(coarse < 0.0);
  CHECK(coarse == doctest::Approx(-2.0 / 30.0).epsilon(1e-8));
  CHECK(refined == doctest::Approx(coarse).epsilon(1e-8));

  std::vector<Vec> loose = bump;
  loose.back()[0] = 0.1;
  CHECK_THROWS_AS(action_derivative(free, line, loose), ArgumentError);
}
