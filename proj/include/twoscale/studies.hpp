#pragma once

#include <iosfwd>
#include <vector>

#include "twoscale/driver.hpp"

namespace twoscale {

/// Observed contraction of the two fixed-point maps on a single slab of the
/// given length, started from the configured initial data.
struct ContractionRow {
  int slab_steps = 0;
  double slab_length = 0.0;
  double inner_ratio = 0.0;  // surface-coupling map, measured on the first sweep
  double outer_ratio = 0.0;  // volume-coupling map
  int outer_iterations = 0;
};

/// Runs one outer slab per requested length (in multiples of config.dt) and
/// records the observed residual-contraction ratios.  Rows keep the caller's
/// order; a single-iteration fixed point reports ratio 0.
std::vector<ContractionRow> run_contraction_study(const RunConfig& config,
                                                  const std::vector<int>& slab_steps);

/// CSV with header slab_steps,slab_length,inner_ratio,outer_ratio,outer_iterations.
void write_contraction_table(const std::vector<ContractionRow>& rows,
                             std::ostream& out);

}  // namespace twoscale
