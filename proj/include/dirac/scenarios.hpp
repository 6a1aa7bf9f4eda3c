#pragma once

#include "dirac/conic_finsler.hpp"
#include "dirac/courant_calculus.hpp"
#include "dirac/direct_limit.hpp"

namespace dirac {

struct MechanicalSystem {
  ConstraintDistribution cd;
  LagrangianModel lm;
};

using DensityFn = std::function<double(double sigma)>;

// Planar rope with nodes j = 0..N at sigma_j = j / N, coordinates node-major
// (x_0, y_0, x_1, y_1, ...). Trapezoid weights w_j, forward differences for
// x' (backward at the last node).
// L = 1/2 sum w_j rho_j |v_j|^2 - sum w_j rho_j g y_j, one row w_j x'_j.
MechanicalSystem build_heavy_rope(int nodes, const DensityFn& rho, double g);

double rope_default_density(double sigma);
// Arc hanging below y = 0 between (0, 0) and (1, 0), at rest.
MechState rope_initial_state(int nodes, double sag = 0.25);

struct LcNetlist {
  Vec inductance;
  Vec capacitance;
  Mat kcl;  // rows with entries in {-1, 0, 1}; may have zero rows
};

// L = 1/2 (v^T diag(L) v - q^T diag(1/C) q), Delta = ker kcl.
MechanicalSystem build_lc_circuit(const LcNetlist& net);

// L = 1/2 |v|^2 - (kx x^2 + ky y^2) / 2 with the Heisenberg contact constraint
// z' = (x y' - y x') / 2, omega = (y/2, -x/2, 1). With kx = ky the planar
// angular momentum is conserved and the multiplier vanishes.
MechanicalSystem build_heisenberg_particle(double kx = 1.0, double ky = 4.0);
Mat heisenberg_constraint(const Vec& q);

struct FrameField {
  int n = 0;
  int k = 0;
  AnchorFn frame;             // n x k, columns are the frame fields
  AnchorDerivativeFn derivative;
};

// X = (1, 0, -y/2), Y = (0, 1, x/2).
FrameField heisenberg_frame();
FrameField abelian_frame(int n);

// Anchored bundle rho = frame, L = 1/2 u^T G u; the frame must be pointwise
// independent at sampled points.
SingularLagrangian build_left_invariant_group(const FrameField& frame, const Mat& metric);

// Sections (X, 0), (Y, 0), (0, theta) of the Heisenberg graph Delta + Delta^0.
std::vector<SectionField> heisenberg_dirac_frame();

AscendingFamily free_family(int max_level);
// Branch 1 and 2 form a loop (KCL row (1, -1, 0, ...)); further branches are
// unit LC oscillators.
AscendingFamily lc_family(int max_level);
// Level n holds n independent uniform ropes in displacement coordinates from
// the straight vertical rope.
AscendingFamily rope_family(int nodes, int max_level, double g = 9.81);
// LC family with a mutual inductance kappa v1 v3 present from level 3 on.
AscendingFamily coupled_lc_family(int max_level, double kappa = 0.5);

// Unit-metric Randers structure on R^2 with wind xi(x) = wind (cos x2, sin x1).
ConicFinslerStructure randers_plane(double wind);
// Constant wind xi on R^2 over the metric G.
ConicFinslerStructure randers_constant(const Mat& metric, const Vec& xi);

}  // namespace dirac
