#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twoscale/exchange.hpp"
#include "twoscale/fem.hpp"
#include "twoscale/kinetics.hpp"
#include "twoscale/micro_vi.hpp"

namespace twoscale {

/// Spatial shape of an initial field, evaluated in normalized coordinates
/// (macro position and cell position each scaled to [0, 1]).  Fields that do
/// not depend on a coordinate receive 0 there.
struct DataProfile {
  enum class Kind { Constant, Linear, Bump };
  Kind kind = Kind::Constant;
  double c0 = 0.0;
  double cx = 0.0;
  double cu = 0.0;
  double cv = 0.0;
  double amp = 0.0;

  static DataProfile constant(double c);
  static DataProfile linear(double c0, double cx, double cu, double cv);
  /// c0 + amp * sin(pi x) * (1 + cos(pi u)) / 2 * (1 + cos(pi v)) / 2.
  static DataProfile bump(double c0, double amp);

  double eval(double x, double u, double v) const;
  double sup() const;
  double inf() const;
};

/// Time shape of the Dirichlet datum.
struct TimeProfile {
  enum class Kind { Constant, Ramp, Exponential };
  Kind kind = Kind::Constant;
  double v0 = 0.0;
  double rate = 0.0;

  static TimeProfile constant(double v0);
  static TimeProfile ramp(double v0, double slope);
  static TimeProfile exponential(double v0, double rate);

  double value(double t) const;
  double derivative(double t) const;
  double sup_on(double t_final) const;
  DirichletDatum datum() const;
};

/// Complete description of a coupled run.
struct RunConfig {
  int macro_elements = 16;
  double macro_length = 1.0;
  int micro_nx = 8;
  int micro_ny = 8;

  double dt = 1e-3;
  double t_final = 0.2;
  int slab_steps = 1;
  int output_every = 10;

  double tol_fp_outer = 1e-11;
  double tol_fp_inner = 1e-12;
  double tol_newton = 1e-12;
  double tol_pos = 1e-10;
  int max_outer = 50;
  int max_inner = 60;
  int max_newton = 25;

  bool lumped = true;
  bool schur = false;
  bool gauss_seidel = false;
  double exchange_scale = 1.0;

  KineticsSpec kinetics;  // kinetics.m is ignored; see trunc_m
  std::optional<double> trunc_m;  // empty = derive from the bounds envelope
  double d1 = 0.1;
  double d2 = 0.1;
  double d3 = 0.1;

  DataProfile w1_init = DataProfile::constant(0.0);
  DataProfile w2_init = DataProfile::constant(0.0);
  DataProfile w3_init = DataProfile::constant(0.0);
  DataProfile w4_init = DataProfile::constant(0.0);
  TimeProfile w3_dirichlet = TimeProfile::constant(0.0);

  int total_steps() const;
  /// Throws ConfigError on out-of-range values, negative initial data, or a
  /// horizon that is not a whole number of steps.
  void validate() const;
};

/// Full two-scale state: per macro node one cell field and one wall-trace
/// field, plus the macro gas field.
struct TwoScaleState {
  std::vector<Vector> w1;
  std::vector<Vector> w2;
  Vector w3;
  std::vector<Vector> w4;
  double t = 0.0;
};

struct BoundsViolation {
  std::string field;
  int macro_index = 0;
  int micro_index = -1;
  double value = 0.0;
  double bound = 0.0;
};

/// Componentwise check of 0 <= field <= ceiling within tol.
std::vector<BoundsViolation> check_bounds(const TwoScaleState& state,
                                          const BoundsEnvelope& env, double tol);

/// Extra sources for manufactured-solution runs.  Volume sources are nodal
/// micro fields per cell; wall sources are nodal on the respective trace;
/// the macro source is nodal on the macro grid.
struct SourceHooks {
  std::function<Vector(double t, int cell)> g1;
  std::function<Vector(double t, int cell)> g2;
  std::function<Vector(double t, int cell)> s1;  // reactive wall
  std::function<Vector(double t, int cell)> s2;  // transmission wall
  std::function<Vector(double t, int cell)> s4;  // surface rate
  std::function<Vector(double t)> g3;            // macro volume
};

struct RunOverrides {
  const SourceHooks* hooks = nullptr;
  const TwoScaleState* initial_state = nullptr;
  const DirichletDatum* dirichlet = nullptr;
};

/// Per-slab convergence record of the outer coupling iteration.
struct SlabRecord {
  double t_start = 0.0;
  double t_end = 0.0;
  int steps = 0;
  std::vector<double> outer_residuals;
  double outer_ratio = 0.0;        // max successive residual ratio
  double inner_ratio_first = 0.0;  // max cell contraction ratio, first sweep
  double inner_ratio_max = 0.0;
  int max_inner_iterations = 0;
};

struct Diagnostics {
  std::vector<SlabRecord> slabs;
  int total_outer_iterations = 0;
  int slab_restarts = 0;
  /// Bound violations found after each accepted slab, with the state time.
  std::vector<std::pair<double, std::vector<BoundsViolation>>> violations;
};

struct OuterOptions {
  double tol_fp_outer = 1e-11;
  int max_outer = 50;
  bool gauss_seidel = false;
  P2Options p2;
  const SourceHooks* hooks = nullptr;
  DirichletDatum dirichlet = DirichletDatum::constant(0.0);
  /// Warm start for the per-cell w4 paths, taken from the previous outer
  /// sweep of a restarted slab; managed by run().
  const std::vector<std::vector<Vector>>* w4_warm = nullptr;
};

struct OuterResult {
  std::vector<TwoScaleState> path;  // indexed 0..n_steps
  SlabRecord record;
};

/// One slab of the outer Picard iteration over the volume coupling: freeze
/// (w1, w2), advance the cell problems, then the exchange pair, repeat until
/// the combined path update stalls.  Throws ContractionFailure when max_outer
/// sweeps do not reach tolerance.
OuterResult outer_step(const TwoScaleState& state, int n_steps, double dt,
                       const OperatorSet& ops, const KineticsSpec& spec,
                       const P3System& p3, const OuterOptions& opt);

struct RunResult {
  std::vector<TwoScaleState> snapshots;
  std::vector<int> snapshot_steps;  // global step index per snapshot
  BoundsEnvelope envelope;
  KineticsSpec kinetics_used;  // includes the truncation level applied
  Diagnostics diagnostics;
};

/// Full slab-marching run.  Slabs that fail to contract are halved down to a
/// single step before the failure is rethrown.  Small negative values (above
/// -tol_pos) are clipped to zero in stored and propagated states; anything
/// beyond that is recorded in the diagnostics.
RunResult run(const RunConfig& config, const RunOverrides& overrides = {});

/// Builds the nodal initial state from the config profiles.
TwoScaleState initial_state(const RunConfig& config, const OperatorSet& ops);

/// Envelope derived from the config's data profiles; matches what run()
/// computes for a profile-built initial state.
BoundsEnvelope profile_envelope(const RunConfig& config);

/// Reference corrosion scenario at desk scale, also shipped as
/// configs/default.cfg: ramp kinetics with an absorbing wall, Henry number 2,
/// smooth positive humps sitting below the invariant envelope.
RunConfig default_scenario();

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> distances;  // max-norm distance across all fields
  double fitted_rate = 0.0;       // least-squares slope of log(distance) vs t
  double initial_distance = 0.0;
};

/// Runs the config twice, the second time with every initial field shifted
/// up by delta, and fits the growth rate of the trajectory distance.
StabilityReport stability_probe(const RunConfig& config, double delta);

}  // namespace twoscale
