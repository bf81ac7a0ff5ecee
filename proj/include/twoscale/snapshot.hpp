#pragma once

#include <string>

#include "twoscale/driver.hpp"

namespace twoscale {

/// Writes a state as CSV rows "field,macro_index,micro_index,value,time" in a
/// fixed deterministic order (w1, w2, w3, w4; macro-major).  The macro field
/// w3 uses micro_index -1; w4 rows use the wall-trace local index.  The file
/// is written to a temporary sibling and renamed into place, so readers never
/// observe a partial snapshot.
void write_snapshot(const TwoScaleState& state, const std::string& path);

/// Reads a snapshot back; sizes are inferred from the rows.  Throws
/// ValidationError on malformed rows or an incomplete field.
TwoScaleState read_snapshot(const std::string& path);

}  // namespace twoscale
