#include "twoscale/studies.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "twoscale/errors.hpp"

namespace twoscale {

std::vector<ContractionRow> run_contraction_study(const RunConfig& config,
                                                  const std::vector<int>& slab_steps) {
  config.validate();
  if (slab_steps.empty()) {
    throw ValidationError("contraction study: need at least one slab length");
  }
  for (const int s : slab_steps) {
    if (s < 1) {
      throw ValidationError("contraction study: slab lengths must be positive");
    }
  }

  DiffusivityField diff;
  diff.d1 = {config.d1};
  diff.d2 = {config.d2};
  diff.d3 = {config.d3};
  const OperatorSet ops =
      build_operator_set(build_macro_mesh(config.macro_elements, config.macro_length),
                         build_micro_mesh(config.micro_nx, config.micro_ny), diff,
                         config.lumped);

  KineticsSpec spec = config.kinetics;
  spec.m.reset();
  spec.validate();
  const BoundsEnvelope env = profile_envelope(config);
  spec.m = config.trunc_m ? *config.trunc_m : env.M0;

  P3Options p3opt;
  p3opt.schur = config.schur;
  p3opt.exchange_scale = config.exchange_scale;
  const P3System p3(ops, spec, config.dt, p3opt);

  OuterOptions oopt;
  oopt.tol_fp_outer = config.tol_fp_outer;
  oopt.max_outer = config.max_outer;
  oopt.gauss_seidel = config.gauss_seidel;
  oopt.dirichlet = config.w3_dirichlet.datum();
  oopt.p2.tol_fp = config.tol_fp_inner;
  oopt.p2.max_fp = config.max_inner;
  oopt.p2.p1.newton_tol = config.tol_newton;
  oopt.p2.p1.max_newton = config.max_newton;

  const TwoScaleState start = initial_state(config, ops);
  std::vector<ContractionRow> rows;
  rows.reserve(slab_steps.size());
  for (const int s : slab_steps) {
    const OuterResult res = outer_step(start, s, config.dt, ops, spec, p3, oopt);
    ContractionRow row;
    row.slab_steps = s;
    row.slab_length = s * config.dt;
    row.inner_ratio = res.record.inner_ratio_first;
    row.outer_ratio = res.record.outer_ratio;
    row.outer_iterations = static_cast<int>(res.record.outer_residuals.size());
    rows.push_back(row);
  }
  return rows;
}

void write_contraction_table(const std::vector<ContractionRow>& rows,
                             std::ostream& out) {
  out << "slab_steps,slab_length,inner_ratio,outer_ratio,outer_iterations\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const ContractionRow& row : rows) {
    out << row.slab_steps << ',';
    put(row.slab_length, ',');
    put(row.inner_ratio, ',');
    put(row.outer_ratio, ',');
    out << row.outer_iterations << '\n';
  }
}

}  // namespace twoscale
