#include "dirac/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dirac {

namespace {

std::vector<double> trapezoid_weights(int nodes) {
  const double h = 1.0 / nodes;
  std::vector<double> w(static_cast<std::size_t>(nodes + 1), h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

// Row w_j x'_j of the rope constraint for node positions z (node-major).
Vec rope_row(const Vec& z, const std::vector<double>& w, int nodes) {
  const double h = 1.0 / nodes;
  Vec row(2 * (nodes + 1));
  for (int j = 0; j <= nodes; ++j) {
    const int a = j < nodes ? j : nodes - 1;
    const double dx = (z[2 * (a + 1)] - z[2 * a]) / h;
    const double dy = (z[2 * (a + 1) + 1] - z[2 * a + 1]) / h;
    row[2 * j] = w[static_cast<std::size_t>(j)] * dx;
    row[2 * j + 1] = w[static_cast<std::size_t>(j)] * dy;
  }
  return row;
}

// Diagonal kinetic term with linear potential -g sum m_j y_j.
LagrangianModel rope_lagrangian(const Vec& mass, double g) {
  const auto dim = static_cast<int>(mass.size());
  LagrangianModel lm(dim, [mass, g](const Vec& x, const Vec& v) {
    double kin = 0.0;
    double pot = 0.0;
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
      kin += mass[i] * v[i] * v[i];
      if (i % 2 == 1) pot += mass[i] * g * x[i];
    }
    return 0.5 * kin - pot;
  });
  lm.with_dx([mass, g](const Vec&, const Vec&) -> Vec {
      Vec d = Vec::Zero(mass.size());
      for (Eigen::Index i = 1; i < mass.size(); i += 2) d[i] = -mass[i] * g;
      return d;
    })
      .with_dv([mass](const Vec&, const Vec& v) -> Vec { return mass.cwiseProduct(v); })
      .with_dvdv([mass](const Vec&, const Vec&) -> Mat { return mass.asDiagonal(); })
      .with_dxdv([dim](const Vec&, const Vec&) -> Mat { return Mat::Zero(dim, dim); });
  return lm;
}

Vec rope_masses(int nodes, const DensityFn& rho) {
  const std::vector<double> w = trapezoid_weights(nodes);
  Vec mass(2 * (nodes + 1));
  for (int j = 0; j <= nodes; ++j) {
    const double r = rho(static_cast<double>(j) / nodes);
    if (!(r > 0.0)) throw InvariantError("heavy rope: density must be positive");
    mass[2 * j] = mass[2 * j + 1] = w[static_cast<std::size_t>(j)] * r;
  }
  return mass;
}

}  // namespace

MechanicalSystem build_heavy_rope(int nodes, const DensityFn& rho, double g) {
  if (nodes < 2) throw ArgumentError("heavy rope: needs at least 2 segments");
  if (!(g >= 0.0)) throw ArgumentError("heavy rope: gravity must be nonnegative");
  const int dim = 2 * (nodes + 1);
  const std::vector<double> w = trapezoid_weights(nodes);
  ConstraintDistribution cd(dim, dim - 1, [w, nodes](const Vec& z) -> Mat {
    return rope_row(z, w, nodes).transpose();
  });
  return {std::move(cd), rope_lagrangian(rope_masses(nodes, rho), g)};
}

double rope_default_density(double sigma) { return 1.0 + 0.5 * sigma; }

MechState rope_initial_state(int nodes, double sag) {
  if (nodes < 2) throw ArgumentError("heavy rope: needs at least 2 segments");
  MechState s;
  s.x.resize(2 * (nodes + 1));
  for (int j = 0; j <= nodes; ++j) {
    const double sigma = static_cast<double>(j) / nodes;
    s.x[2 * j] = sigma;
    s.x[2 * j + 1] = -sag * std::sin(std::numbers::pi * sigma);
  }
  s.v = Vec::Zero(s.x.size());
  return s;
}

MechanicalSystem build_lc_circuit(const LcNetlist& net) {
  const auto n = static_cast<int>(net.inductance.size());
  if (n < 1 || net.capacitance.size() != n) throw ArgumentError("LC circuit: need matching inductance and capacitance lists");
  if (net.kcl.rows() > 0 && net.kcl.cols() != n) throw DimensionError("LC circuit: KCL rows must have one entry per branch");
  for (int i = 0; i < n; ++i) {
    if (!(net.inductance[i] > 0.0) || !(net.capacitance[i] > 0.0)) {
      throw InvariantError("LC circuit: inductances and capacitances must be positive");
    }
  }
  for (Eigen::Index r = 0; r < net.kcl.rows(); ++r) {
    for (Eigen::Index c = 0; c < net.kcl.cols(); ++c) {
      const double e = net.kcl(r, c);
      if (e != 0.0 && e != 1.0 && e != -1.0) throw InvariantError("LC circuit: KCL entries must be -1, 0 or 1");
    }
  }
  if (net.kcl.rows() > 0 && numerical_rank(net.kcl) < net.kcl.rows()) {
    throw InvariantError("LC circuit: KCL rows are linearly dependent");
  }
  const Mat mass = net.inductance.asDiagonal();
  const Mat stiffness = net.capacitance.cwiseInverse().asDiagonal();
  ConstraintDistribution cd = net.kcl.rows() == 0 ? ConstraintDistribution::unconstrained(n)
                                                  : ConstraintDistribution::constant(net.kcl);
  return {std::move(cd), LagrangianModel::quadratic(mass, stiffness)};
}

Mat heisenberg_constraint(const Vec& q) {
  Mat w(1, 3);
  w << 0.5 * q[1], -0.5 * q[0], 1.0;
  return w;
}

MechanicalSystem build_heisenberg_particle(double kx, double ky) {
  if (!(kx >= 0.0) || !(ky >= 0.0)) throw ArgumentError("Heisenberg particle: trap stiffness must be nonnegative");
  ConstraintDistribution cd(3, 2, [](const Vec& q) { return heisenberg_constraint(q); });
  Mat stiffness = Mat::Zero(3, 3);
  stiffness(0, 0) = kx;
  stiffness(1, 1) = ky;
  return {std::move(cd), LagrangianModel::quadratic(Mat::Identity(3, 3), stiffness)};
}

FrameField heisenberg_frame() {
  FrameField f;
  f.n = 3;
  f.k = 2;
  f.frame = [](const Vec& q) -> Mat {
    Mat r(3, 2);
    r << 1.0, 0.0, 0.0, 1.0, -0.5 * q[1], 0.5 * q[0];
    return r;
  };
  f.derivative = [](const Vec&) {
    std::vector<Mat> d(3, Mat::Zero(3, 2));
    d[0](2, 1) = 0.5;
    d[1](2, 0) = -0.5;
    return d;
  };
  return f;
}

FrameField abelian_frame(int n) {
  if (n < 1) throw ArgumentError("abelian frame: dimension must be at least 1");
  FrameField f;
  f.n = n;
  f.k = n;
  f.frame = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
  f.derivative = [n](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)); };
  return f;
}

SingularLagrangian build_left_invariant_group(const FrameField& frame, const Mat& metric) {
  if (!frame.frame) throw ArgumentError("left-invariant group: missing frame evaluator");
  AnchoredBundle bundle(frame.n, frame.k, frame.frame);
  if (frame.derivative) bundle.with_derivative(frame.derivative);
  std::mt19937_64 rng(20240611);
  bundle.validate(rng, 16, frame.k, 2.0);
  return SingularLagrangian::quadratic(std::move(bundle), metric);
}

std::vector<SectionField> heisenberg_dirac_frame() {
  const auto zero3 = [](const Vec&) -> Vec { return Vec::Zero(3); };
  const auto zero33 = [](const Vec&) -> Mat { return Mat::Zero(3, 3); };
  std::vector<SectionField> frame;

  SectionField x_field(3, [](const Vec& q) -> Vec { return Vec{{1.0, 0.0, -0.5 * q[1]}}; }, zero3);
  x_field.with_jacobians(
      [](const Vec&) -> Mat {
        Mat j = Mat::Zero(3, 3);
        j(2, 1) = -0.5;
        return j;
      },
      zero33);
  frame.push_back(x_field);

  SectionField y_field(3, [](const Vec& q) -> Vec { return Vec{{0.0, 1.0, 0.5 * q[0]}}; }, zero3);
  y_field.with_jacobians(
      [](const Vec&) -> Mat {
        Mat j = Mat::Zero(3, 3);
        j(2, 0) = 0.5;
        return j;
      },
      zero33);
  frame.push_back(y_field);

  SectionField theta(3, zero3, [](const Vec& q) -> Vec { return heisenberg_constraint(q).transpose(); });
  theta.with_jacobians(zero33, [](const Vec&) -> Mat {
    Mat j = Mat::Zero(3, 3);
    j(0, 1) = 0.5;
    j(1, 0) = -0.5;
    return j;
  });
  frame.push_back(theta);
  return frame;
}

AscendingFamily free_family(int max_level) {
  return AscendingFamily(
      "free",
      [](int n) {
        return LevelSystem{n, ConstraintDistribution::unconstrained(n),
                           LagrangianModel::quadratic(Mat::Identity(n, n), Mat::Zero(n, n))};
      },
      1, max_level);
}

namespace {

LevelSystem lc_level(int n, double kappa) {
  LcNetlist net;
  net.inductance = Vec::Ones(n);
  net.capacitance = Vec::Ones(n);
  net.inductance[1] = 2.0;
  net.capacitance[1] = 0.5;
  net.kcl = Mat::Zero(1, n);
  net.kcl(0, 0) = 1.0;
  net.kcl(0, 1) = -1.0;
  MechanicalSystem sys = build_lc_circuit(net);
  if (kappa != 0.0 && n >= 3) {
    Mat mass = net.inductance.asDiagonal();
    mass(0, 2) = mass(2, 0) = kappa;
    sys.lm = LagrangianModel::quadratic(mass, net.capacitance.cwiseInverse().asDiagonal());
  }
  return LevelSystem{n, std::move(sys.cd), std::move(sys.lm)};
}

}  // namespace

AscendingFamily lc_family(int max_level) {
  return AscendingFamily("lc", [](int n) { return lc_level(n, 0.0); }, 2, max_level);
}

AscendingFamily coupled_lc_family(int max_level, double kappa) {
  return AscendingFamily("coupled_lc", [kappa](int n) { return lc_level(n, kappa); }, 2, max_level);
}

AscendingFamily rope_family(int nodes, int max_level, double g) {
  if (nodes < 2) throw ArgumentError("rope family: needs at least 2 segments");
  return AscendingFamily(
      "rope",
      [nodes, g](int n) {
        const int block = 2 * (nodes + 1);
        const int dim = n * block;
        const std::vector<double> w = trapezoid_weights(nodes);
        Vec reference = Vec::Zero(block);
        for (int j = 0; j <= nodes; ++j) reference[2 * j + 1] = -static_cast<double>(j) / nodes;
        ConstraintDistribution cd(dim, dim - n, [=](const Vec& xi) -> Mat {
          Mat rows = Mat::Zero(n, dim);
          for (int r = 0; r < n; ++r) {
            rows.block(r, r * block, 1, block) = rope_row(reference + xi.segment(r * block, block), w, nodes).transpose();
          }
          return rows;
        });
        const Vec block_mass = rope_masses(nodes, [](double) { return 1.0; });
        Vec mass(dim);
        for (int r = 0; r < n; ++r) mass.segment(r * block, block) = block_mass;
        return LevelSystem{dim, std::move(cd), rope_lagrangian(mass, g)};
      },
      1, max_level);
}

ConicFinslerStructure randers_constant(const Mat& metric, const Vec& xi) {
  const ConicMinkowskiNorm norm = randers_norm(metric, xi);
  const auto k = static_cast<int>(metric.rows());
  AnchoredBundle bundle(k, k, [k](const Vec&) -> Mat { return Mat::Identity(k, k); });
  bundle.with_derivative([k](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(k), Mat::Zero(k, k)); });
  ConicFinslerStructure fs(std::move(bundle), [norm](const Vec&) { return norm; });
  fs.with_dx([k](const Vec&, const Vec&) -> Vec { return Vec::Zero(k); });
  return fs;
}

ConicFinslerStructure randers_plane(double wind) {
  if (!(std::abs(wind) * std::sqrt(2.0) < 1.0)) throw InvariantError("randers plane: wind too strong for a Minkowski norm");
  AnchoredBundle bundle(2, 2, [](const Vec&) -> Mat { return Mat::Identity(2, 2); });
  bundle.with_derivative([](const Vec&) { return std::vector<Mat>(2, Mat::Zero(2, 2)); });
  const auto xi = [wind](const Vec& x) -> Vec { return Vec{{wind * std::cos(x[1]), wind * std::sin(x[0])}}; };
  ConicFinslerStructure fs(std::move(bundle), [xi](const Vec& x) { return randers_norm(Mat::Identity(2, 2), xi(x)); });
  fs.with_dx([xi, wind](const Vec& x, const Vec& u) -> Vec {
    const double f = u.norm() + xi(x).dot(u);
    return Vec{{f * wind * std::cos(x[0]) * u[1], -f * wind * std::sin(x[1]) * u[0]}};
  });
  return fs;
}

}  // namespace dirac
