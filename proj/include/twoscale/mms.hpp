#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "twoscale/driver.hpp"

namespace twoscale {

/// Closed-form target fields together with the compensating sources that make
/// them an exact solution of the coupled system.  Coordinates are physical:
/// x along the macro rod (length fixed to 1 here), (u, v) in the unit cell,
/// t in time.  The expressions must be smooth on a neighbourhood of the
/// closed domain so that difference quotients can cross the boundary.
///
/// Structural constraints on the targets (they have no compensating source):
///   - w1 has zero normal flux on the transmission wall and the insulated pair;
///   - w2 has zero normal flux on the reactive wall and the insulated pair;
///   - w3 has zero slope at the far end of the rod.
/// Everything else is absorbed into the sources.
struct MMSCase {
  std::string name;
  KineticsSpec kinetics;
  double d1 = 0.1;
  double d2 = 0.1;
  double d3 = 0.1;
  double exchange_scale = 1.0;
  double t_final = 0.25;
  double trunc_level = 100.0;  // far above every target value

  std::function<double(double x, double u, double v, double t)> w1, w2;
  std::function<double(double x, double t)> w3;
  std::function<double(double x, double v, double t)> w4;  // reactive-wall trace

  std::function<double(double x, double u, double v, double t)> g1, g2;
  std::function<double(double x, double v, double t)> s1;  // reactive wall, w1
  std::function<double(double x, double v, double t)> s2;  // transmission wall, w2
  std::function<double(double x, double v, double t)> s4;  // surface rate
  std::function<double(double x, double t)> s3;            // macro volume

  // Coarsest rung of the refinement ladder.
  int base_macro_elements = 4;
  int base_micro = 4;
  double base_dt = 0.03125;
};

/// Constant-in-time targets that are linear in x and constant within each
/// cell; the P1 discretization reproduces them exactly, so every ladder level
/// errs only at solver-roundoff size.
MMSCase mms_trivial();

/// Quadratic-in-space targets with an exponential decay in time; exercises
/// every coupling path and converges at second order under the joint ladder
/// (mesh halved, dt quartered).
MMSCase mms_spatial();

/// Targets the P1 spaces represent exactly (linear in x, constant within each
/// cell) with strong time dependence, so a dt-only ladder on a fixed mesh
/// measures the pure first-order time-stepping error.
MMSCase mms_temporal();

/// Worst pointwise residual of the targets in the strong-form system with the
/// case's sources.  Every derivative is taken by fourth-order central
/// differences and the wall integral by Simpson quadrature, so the check is
/// independent of the hand-derived source formulas.  Covers the four
/// evolution equations, every boundary condition, and the Dirichlet datum.
double mms_residual_check(const MMSCase& c, int samples_per_axis = 7);

enum class RefinementMode {
  Space,  // mesh halved and dt quartered per level
  Time,   // fixed mesh, dt halved per level
};

struct ConvergenceLevel {
  int level = 0;
  double h = 0.0;  // micro mesh spacing; the macro spacing refines in lockstep
  double dt = 0.0;
  double err_w1 = 0.0, err_w2 = 0.0, err_w3 = 0.0, err_w4 = 0.0;
  // Successive log-ratio orders against the refined variable; NaN on the
  // first level and wherever an error sits at roundoff.
  double order_w1 = 0.0, order_w2 = 0.0, order_w3 = 0.0, order_w4 = 0.0;
};

struct ConvergenceTable {
  RefinementMode mode = RefinementMode::Space;
  std::vector<ConvergenceLevel> levels;
  // Least-squares slopes of log(error) against the log of the refined
  // variable, skipping roundoff-level entries; NaN when fewer than two
  // levels carry signal.
  double fitted_w1 = 0.0, fitted_w2 = 0.0, fitted_w3 = 0.0, fitted_w4 = 0.0;
};

/// Runs the full solver with the case's sources on `depth` refinement levels
/// and measures final-time discrete L2 errors per field (lumped quadrature
/// weights on both scales).  Requires depth >= 3.  When `solver_knobs` is
/// given, its tolerances, iteration budgets, slab length, and the lumped /
/// schur / gauss_seidel toggles replace the defaults on every level; meshes,
/// time steps, and data still come from the case.
ConvergenceTable run_mms_study(const MMSCase& c, int depth, RefinementMode mode,
                               const RunConfig* solver_knobs = nullptr);

/// CSV with header
/// level,h,dt,err_w1,err_w2,err_w3,err_w4,order_w1,order_w2,order_w3,order_w4.
void write_convergence_table(const ConvergenceTable& table, std::ostream& out);

}  // namespace twoscale
