#include "twoscale/micro_vi.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

void check_p1_sizes(const Vector& w1_prev, const Vector& g, const Vector& h,
                    double dt, const OperatorSet& ops, const P1Options& opt) {
  if (w1_prev.size() != ops.n_micro() || g.size() != ops.n_micro()) {
    throw ValidationError("cell step: field size does not match the mesh");
  }
  if (h.size() != ops.gamma1.size()) {
    throw ValidationError("cell step: wall factor size does not match the trace");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("cell step: dt must be positive");
  }
  if (h.size() > 0 && h.minCoeff() < 0.0) {
    throw ValidationError("cell step: wall factor must be nonnegative");
  }
  if (opt.gamma1_source && opt.gamma1_source->size() != ops.gamma1.size()) {
    throw ValidationError("cell step: wall source size does not match the trace");
  }
}

/// Residual of the implicit step at w; fixed contains every w-independent term.
Vector p1_residual(const Vector& w, const Vector& fixed, const Vector& h,
                   const SparseOperator& k_step, const OperatorSet& ops,
                   const KineticsSpec& spec) {
  Vector r = k_step * w - fixed;
  const BoundaryOperator& g1 = ops.gamma1;
  for (int k = 0; k < g1.size(); ++k) {
    r[g1.nodes[k]] += g1.weights[k] * h[k] * eval_R(spec, w[g1.nodes[k]]);
  }
  return r;
}

}  // namespace

Vector p1_step(const Vector& w1_prev, const Vector& g, const Vector& h, double dt,
               const OperatorSet& ops, const KineticsSpec& spec,
               const P1Options& opt) {
  check_p1_sizes(w1_prev, g, h, dt, ops, opt);
  spec.validate();

  const SparseOperator k_step = ops.micro_mass / dt + ops.micro_stiff_d1;

  Vector fixed = ops.micro_mass * (w1_prev / dt + g);
  if (opt.gamma1_source) {
    const BoundaryOperator& g1 = ops.gamma1;
    for (int k = 0; k < g1.size(); ++k) {
      fixed[g1.nodes[k]] += g1.weights[k] * (*opt.gamma1_source)[k];
    }
  }

  Vector w = w1_prev;
  Vector res = p1_residual(w, fixed, h, k_step, ops, spec);
  double res_norm = res.lpNorm<Eigen::Infinity>();

  Eigen::SimplicialLDLT<SparseOperator> solver;
  bool analyzed = false;

  for (int it = 0; it < opt.max_newton; ++it) {
    if (res_norm <= opt.newton_tol) {
      return w;
    }
    SparseOperator jac = k_step;
    {
      // Wall contribution: nonnegative diagonal, keeps the Jacobian SPD.
      std::vector<Eigen::Triplet<double>> trip;
      const BoundaryOperator& g1 = ops.gamma1;
      for (int k = 0; k < g1.size(); ++k) {
        trip.emplace_back(g1.nodes[k], g1.nodes[k],
                          g1.weights[k] * h[k] * eval_R_slope(spec, w[g1.nodes[k]]));
      }
      SparseOperator diag(ops.n_micro(), ops.n_micro());
      diag.setFromTriplets(trip.begin(), trip.end());
      jac += diag;
    }
    if (!analyzed) {
      solver.analyzePattern(jac);
      analyzed = true;
    }
    solver.factorize(jac);
    if (solver.info() != Eigen::Success) {
      throw SingularSystem("cell step: Newton matrix factorization failed");
    }
    const Vector delta = solver.solve(-res);

    double lambda = 1.0;
    bool accepted = false;
    for (int d = 0; d < opt.max_damping; ++d) {
      const Vector trial = w + lambda * delta;
      const Vector trial_res = p1_residual(trial, fixed, h, k_step, ops, spec);
      const double trial_norm = trial_res.lpNorm<Eigen::Infinity>();
      if (trial_norm <= (1.0 - 0.25 * lambda) * res_norm || trial_norm <= opt.newton_tol) {
        w = trial;
        res = trial_res;
        res_norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      throw NewtonFailure("cell step: damping failed to reduce the residual",
                          res_norm);
    }
  }
  if (res_norm <= opt.newton_tol) {
    return w;
  }
  throw NewtonFailure("cell step: iteration budget exhausted", res_norm);
}

double p1_vi_residual(const Vector& w1_new, const Vector& w1_prev, const Vector& g,
                      const Vector& h, const Vector& probe, double dt,
                      const OperatorSet& ops, const KineticsSpec& spec,
                      const P1Options& opt) {
  check_p1_sizes(w1_prev, g, h, dt, ops, opt);
  if (w1_new.size() != ops.n_micro() || probe.size() != ops.n_micro()) {
    throw ValidationError("step inequality: field size does not match the mesh");
  }

  const Vector diff = probe - w1_new;
  double total = diff.dot(ops.micro_mass * ((w1_new - w1_prev) / dt - g)) +
                 diff.dot(ops.micro_stiff_d1 * w1_new);
  const BoundaryOperator& g1 = ops.gamma1;
  for (int k = 0; k < g1.size(); ++k) {
    const int n = g1.nodes[k];
    total += g1.weights[k] * h[k] *
             (eval_R_primitive(spec, probe[n]) - eval_R_primitive(spec, w1_new[n]));
    if (opt.gamma1_source) {
      total -= g1.weights[k] * (*opt.gamma1_source)[k] * diff[n];
    }
  }
  return std::max(0.0, -total);
}

namespace {

Vector eta_on_trace(const Vector& w1, const Vector& w4_bar, const OperatorSet& ops,
                    const KineticsSpec& spec) {
  const BoundaryOperator& g1 = ops.gamma1;
  Vector eta(g1.size());
  for (int k = 0; k < g1.size(); ++k) {
    eta[k] = eval_R(spec, w1[g1.nodes[k]]) * eval_Q(spec, w4_bar[k]);
  }
  return eta;
}

double trace_norm(const Vector& v, const BoundaryOperator& g1) {
  return std::sqrt(v.dot(g1.weights.asDiagonal() * v));
}

}  // namespace

SlabPath p2_apply(const CellState& start, const std::vector<Vector>& g_path,
                  const std::vector<Vector>& w4_bar, int n_steps, double dt,
                  const OperatorSet& ops, const KineticsSpec& spec,
                  const P2Options& opt) {
  if (n_steps < 1) {
    throw ValidationError("slab march: need at least one step");
  }
  const auto steps = static_cast<std::size_t>(n_steps);
  if (g_path.size() != steps + 1 || w4_bar.size() != steps + 1) {
    throw ValidationError("slab march: path length does not match the step count");
  }
  if (start.w4.size() != ops.gamma1.size()) {
    throw ValidationError("slab march: surface state size does not match the trace");
  }

  SlabPath out;
  out.w1.resize(steps + 1);
  out.w4.resize(steps + 1);
  out.w1[0] = start.w1;

  // Saturation factor frozen along the given w4 path.
  for (std::size_t k = 1; k <= steps; ++k) {
    Vector h(ops.gamma1.size());
    for (int j = 0; j < ops.gamma1.size(); ++j) {
      h[j] = eval_Q(spec, w4_bar[k][j]);
    }
    P1Options p1 = opt.p1;
    if (opt.gamma1_source_path) {
      p1.gamma1_source = &(*opt.gamma1_source_path)[k];
    }
    out.w1[k] = p1_step(out.w1[k - 1], g_path[k], h, dt, ops, spec, p1);
  }

  // Trapezoid integration of the surface rate along the frozen w4 path.
  std::vector<Vector> eta(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    eta[k] = eta_on_trace(out.w1[k], w4_bar[k], ops, spec);
    if (opt.w4_source_path) {
      eta[k] += (*opt.w4_source_path)[k];
    }
  }
  out.w4[0] = start.w4;
  for (std::size_t k = 1; k <= steps; ++k) {
    out.w4[k] = out.w4[k - 1] + (0.5 * dt) * (eta[k - 1] + eta[k]);
  }
  return out;
}

P2Result p2_slab(const CellState& start, const std::vector<Vector>& g_path,
                 int n_steps, double dt, const OperatorSet& ops,
                 const KineticsSpec& spec, const P2Options& opt) {
  const auto steps = static_cast<std::size_t>(n_steps);
  std::vector<Vector> w4_bar;
  if (opt.w4_warm_start) {
    if (opt.w4_warm_start->size() != steps + 1) {
      throw ValidationError("slab march: warm start length does not match");
    }
    w4_bar = *opt.w4_warm_start;
    w4_bar[0] = start.w4;
  } else {
    w4_bar.assign(steps + 1, start.w4);
  }

  FixedPointReport report;
  SlabPath path;
  for (int it = 0; it < opt.max_fp; ++it) {
    path = p2_apply(start, g_path, w4_bar, n_steps, dt, ops, spec, opt);
    double resid = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      resid = std::max(resid, trace_norm(path.w4[k] - w4_bar[k], ops.gamma1));
    }
    report.residual_history.push_back(resid);
    w4_bar = path.w4;
    if (resid <= opt.tol_fp) {
      report.converged = true;
      break;
    }
  }
  report.iterations = static_cast<int>(report.residual_history.size());
  for (std::size_t i = 1; i < report.residual_history.size(); ++i) {
    const double prev = report.residual_history[i - 1];
    if (prev > opt.tol_fp) {
      report.contraction_ratio =
          std::max(report.contraction_ratio, report.residual_history[i] / prev);
    }
  }
  if (!report.converged) {
    throw ContractionFailure("surface coupling fixed point stalled",
                             report.residual_history);
  }

  P2Result result;
  result.report = report;
  result.path.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    result.path[k] =
        CellState{path.w1[k], path.w4[k], start.t + static_cast<double>(k) * dt};
  }
  return result;
}

}  // namespace twoscale
