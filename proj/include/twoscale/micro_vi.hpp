#pragma once

#include <vector>

#include "twoscale/fem.hpp"
#include "twoscale/kinetics.hpp"

namespace twoscale {

/// State of one cell problem: the dissolved species on the cell and the
/// surface product on the reactive-wall trace.
struct CellState {
  Vector w1;  // size n_micro
  Vector w4;  // size of the gamma1 trace
  double t = 0.0;
};

/// Convergence record of a fixed-point loop.  `contraction_ratio` is the
/// largest successive residual ratio over pairs whose earlier residual was
/// still above tolerance; 0 when the loop converged in a single application.
struct FixedPointReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  double contraction_ratio = 0.0;
};

struct P1Options {
  double newton_tol = 1e-12;  // absolute, on the max-norm of the residual
  int max_newton = 25;
  int max_damping = 30;
  /// Optional extra inflow on the reactive wall, nodal on the trace; used by
  /// manufactured-solution runs.
  const Vector* gamma1_source = nullptr;
};

/// One implicit step of the cell diffusion problem
///   (M/dt)(w - w_prev) + A1 w + b .* h .* R(w)|_gamma1 = M g + b .* s1|_gamma1
/// where h >= 0 is the frozen saturation factor on the reactive wall and the
/// nonlinear wall term uses nodal quadrature (weights b).  Solved by damped
/// Newton; the Jacobian stays symmetric positive definite because the wall
/// contribution is a nonnegative diagonal.
///
/// Throws ValidationError on negative h or size mismatches, NewtonFailure
/// when the iteration budget is exhausted.
Vector p1_step(const Vector& w1_prev, const Vector& g, const Vector& h, double dt,
               const OperatorSet& ops, const KineticsSpec& spec,
               const P1Options& opt = {});

/// Violation of the discrete step inequality at a probe field v:
///   max(0, -[ (M dw/dt + A1 w - M g - b s1, v - w) + sum_k b_k h_k (Rhat(v_k) - Rhat(w_k)) ])
/// Nonpositive (up to roundoff) for any v when w solves the step above,
/// because Rhat is convex.
double p1_vi_residual(const Vector& w1_new, const Vector& w1_prev, const Vector& g,
                      const Vector& h, const Vector& probe, double dt,
                      const OperatorSet& ops, const KineticsSpec& spec,
                      const P1Options& opt = {});

struct P2Options {
  P1Options p1;
  double tol_fp = 1e-12;  // on the trace-weighted norm of the w4 path update
  int max_fp = 60;
  /// Per-step extra sources for manufactured runs, indexed 0..n_steps (entry
  /// k belongs to time t0 + k dt; entry 0 is unused for gamma1).
  const std::vector<Vector>* gamma1_source_path = nullptr;
  const std::vector<Vector>* w4_source_path = nullptr;
  /// Warm start for the frozen w4 path (size n_steps + 1); defaults to the
  /// constant extension of the start value.
  const std::vector<Vector>* w4_warm_start = nullptr;
};

/// One application of the surface-coupling map: march the cell diffusion
/// problem over the slab with the saturation factor frozen at Q(w4_bar),
/// then integrate the surface rate along the result by the trapezoid rule.
struct SlabPath {
  std::vector<Vector> w1;  // indexed 0..n_steps
  std::vector<Vector> w4;
};

SlabPath p2_apply(const CellState& start, const std::vector<Vector>& g_path,
                  const std::vector<Vector>& w4_bar, int n_steps, double dt,
                  const OperatorSet& ops, const KineticsSpec& spec,
                  const P2Options& opt = {});

/// Fixed-point iteration of p2_apply until the w4 path stops moving.  Throws
/// ContractionFailure (with the residual history) when max_fp applications
/// do not reach tolerance.
struct P2Result {
  std::vector<CellState> path;  // indexed 0..n_steps
  FixedPointReport report;
};

P2Result p2_slab(const CellState& start, const std::vector<Vector>& g_path,
                 int n_steps, double dt, const OperatorSet& ops,
                 const KineticsSpec& spec, const P2Options& opt = {});

}  // namespace twoscale
