#include "twoscale/mms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Kinetics shared by the shipped cases: both volume rates active, reactive
/// wall strictly inside the smooth regime (targets positive, w4 < beta_max).
KineticsSpec mms_kinetics() {
  KineticsSpec k;
  k.k_f1 = 1.0;
  k.k_f2 = 0.8;
  k.k_R = 1.2;
  k.k_Q = 0.9;
  k.beta_max = 1.0;
  k.henry = 1.5;
  k.alpha = 0.8;
  k.p_R = 1.0;
  return k;
}

KineticsSpec with_level(const MMSCase& c) {
  KineticsSpec k = c.kinetics;
  k.m = c.trunc_level;
  return k;
}

}  // namespace

MMSCase mms_trivial() {
  MMSCase c;
  c.name = "linear-steady";
  c.kinetics = mms_kinetics();
  c.d1 = 0.08;
  c.d2 = 0.12;
  c.d3 = 0.1;
  c.t_final = 0.1;
  c.base_macro_elements = 2;
  c.base_micro = 2;
  c.base_dt = 0.025;

  const KineticsSpec ks = with_level(c);
  const double alpha = ks.alpha;
  const double H = ks.henry;
  const double scale = c.exchange_scale;

  auto a1 = [](double x) { return 0.3 + 0.2 * x; };
  auto a2 = [](double x) { return 0.25 + 0.1 * x; };
  auto a4 = [](double x) { return 0.2 + 0.1 * x; };

  c.w1 = [a1](double x, double, double, double) { return a1(x); };
  c.w2 = [a2](double x, double, double, double) { return a2(x); };
  c.w3 = [](double, double) { return 0.4; };
  c.w4 = [a4](double x, double, double) { return a4(x); };

  c.g1 = [ks, a1, a2](double x, double, double, double) {
    return eval_f(ks, 1, a1(x)) - eval_f(ks, 2, a2(x));
  };
  c.g2 = [ks, a1, a2](double x, double, double, double) {
    return eval_f(ks, 2, a2(x)) - eval_f(ks, 1, a1(x));
  };
  c.s1 = [ks, a1, a4](double x, double, double) {
    return eval_eta(ks, a1(x), a4(x));
  };
  c.s2 = [alpha, H, a2](double x, double, double) {
    return -alpha * (H * 0.4 - a2(x));
  };
  c.s3 = [scale, alpha, H, a2](double x, double) {
    return scale * alpha * (H * 0.4 - a2(x));
  };
  c.s4 = [ks, a1, a4](double x, double, double) {
    return -eval_eta(ks, a1(x), a4(x));
  };
  return c;
}

MMSCase mms_spatial() {
  MMSCase c;
  c.name = "quadratic-decay";
  c.kinetics = mms_kinetics();
  c.d1 = 0.08;
  c.d2 = 0.12;
  c.d3 = 0.1;
  c.t_final = 0.25;
  c.base_macro_elements = 2;
  c.base_micro = 2;
  c.base_dt = 0.03125;

  const KineticsSpec ks = with_level(c);
  const double d1 = c.d1, d2 = c.d2, d3 = c.d3;
  const double alpha = ks.alpha;
  const double H = ks.henry;
  const double scale = c.exchange_scale;

  auto phi = [](double t) { return std::exp(-t); };  // phi' = -phi
  auto a1 = [](double x) { return 0.3 + 0.15 * x * x; };
  auto psi1 = [](double u) { return 1.0 + 0.5 * (1.0 - u) * (1.0 - u); };
  auto a2 = [](double x) { return 0.25 + 0.1 * (1.0 - x) * (1.0 - x); };
  auto psi2 = [](double u) { return 1.0 + 0.5 * u * u; };
  auto a3 = [](double x) { return 0.3 * (1.0 + 0.5 * (1.0 - x) * (1.0 - x)); };
  auto b4 = [](double x) { return 0.2 + 0.1 * x * x; };
  auto theta = [](double t) { return 1.0 - 0.5 * std::exp(-t); };

  c.w1 = [phi, a1, psi1](double x, double u, double, double t) {
    return phi(t) * a1(x) * psi1(u);
  };
  c.w2 = [phi, a2, psi2](double x, double u, double, double t) {
    return phi(t) * a2(x) * psi2(u);
  };
  c.w3 = [phi, a3](double x, double t) { return phi(t) * a3(x); };
  c.w4 = [b4, theta](double x, double, double t) { return b4(x) * theta(t); };

  // psi1'' = psi2'' = 1 and a3'' = 0.3; the insulated pair is flux-free by
  // v-independence, the far-cell wall by psi1'(1) = 0, the reactive wall for
  // w2 by psi2'(0) = 0, and the rod end by a3'(1) = 0.
  const auto w1f = c.w1;
  const auto w2f = c.w2;
  const auto w4f = c.w4;
  c.g1 = [phi, a1, psi1, d1, ks, w1f, w2f](double x, double u, double v, double t) {
    return -phi(t) * a1(x) * psi1(u) - d1 * phi(t) * a1(x) +
           eval_f(ks, 1, w1f(x, u, v, t)) - eval_f(ks, 2, w2f(x, u, v, t));
  };
  c.g2 = [phi, a2, psi2, d2, ks, w1f, w2f](double x, double u, double v, double t) {
    return -phi(t) * a2(x) * psi2(u) - d2 * phi(t) * a2(x) +
           eval_f(ks, 2, w2f(x, u, v, t)) - eval_f(ks, 1, w1f(x, u, v, t));
  };
  c.s1 = [ks, d1, phi, a1, w1f, w4f](double x, double v, double t) {
    return eval_eta(ks, w1f(x, 0.0, v, t), w4f(x, v, t)) + d1 * phi(t) * a1(x);
  };
  c.s2 = [d2, alpha, H, phi, a2, a3, psi2](double x, double, double t) {
    return d2 * phi(t) * a2(x) -
           alpha * (H * phi(t) * a3(x) - phi(t) * a2(x) * psi2(1.0));
  };
  c.s3 = [d3, scale, alpha, H, phi, a2, a3, psi2](double x, double t) {
    return -phi(t) * a3(x) - d3 * phi(t) * 0.3 +
           scale * alpha * (H * phi(t) * a3(x) - phi(t) * a2(x) * psi2(1.0));
  };
  c.s4 = [ks, b4, w1f, w4f](double x, double v, double t) {
    return b4(x) * 0.5 * std::exp(-t) - eval_eta(ks, w1f(x, 0.0, v, t), w4f(x, v, t));
  };
  return c;
}

MMSCase mms_temporal() {
  MMSCase c;
  c.name = "nodal-decay";
  c.kinetics = mms_kinetics();
  c.d1 = 0.08;
  c.d2 = 0.12;
  c.d3 = 0.1;
  c.t_final = 0.25;
  c.base_macro_elements = 4;
  c.base_micro = 3;
  c.base_dt = 0.03125;

  const KineticsSpec ks = with_level(c);
  const double alpha = ks.alpha;
  const double H = ks.henry;
  const double scale = c.exchange_scale;

  auto phi = [](double t) { return std::exp(-3.0 * t); };  // phi' = -3 phi
  auto a1 = [](double x) { return 0.3 + 0.1 * x; };
  auto a2 = [](double x) { return 0.25 + 0.08 * (1.0 - x); };
  const double a3 = 0.35;

  c.w1 = [phi, a1](double x, double, double, double t) { return phi(t) * a1(x); };
  c.w2 = [phi, a2](double x, double, double, double t) { return phi(t) * a2(x); };
  c.w3 = [phi, a3](double, double t) { return phi(t) * a3; };
  c.w4 = [](double x, double, double t) {
    return 0.2 + 0.1 * x + 0.1 * (1.0 - std::exp(-2.0 * t));
  };

  // Constant within each cell and constant in x for w3: the P1 spaces carry
  // the targets exactly, so a dt ladder on a fixed mesh sees only the
  // time-stepping error.
  const auto w1f = c.w1;
  const auto w2f = c.w2;
  const auto w4f = c.w4;
  c.g1 = [phi, a1, ks, w1f, w2f](double x, double u, double v, double t) {
    return -3.0 * phi(t) * a1(x) + eval_f(ks, 1, w1f(x, u, v, t)) -
           eval_f(ks, 2, w2f(x, u, v, t));
  };
  c.g2 = [phi, a2, ks, w1f, w2f](double x, double u, double v, double t) {
    return -3.0 * phi(t) * a2(x) + eval_f(ks, 2, w2f(x, u, v, t)) -
           eval_f(ks, 1, w1f(x, u, v, t));
  };
  c.s1 = [ks, w1f, w4f](double x, double v, double t) {
    return eval_eta(ks, w1f(x, 0.0, v, t), w4f(x, v, t));
  };
  c.s2 = [alpha, H, phi, a2, a3](double x, double, double t) {
    return -alpha * (H * phi(t) * a3 - phi(t) * a2(x));
  };
  c.s3 = [scale, alpha, H, phi, a2, a3](double x, double t) {
    return -3.0 * phi(t) * a3 + scale * alpha * (H * phi(t) * a3 - phi(t) * a2(x));
  };
  c.s4 = [ks, w1f, w4f](double x, double v, double t) {
    return 0.2 * std::exp(-2.0 * t) - eval_eta(ks, w1f(x, 0.0, v, t), w4f(x, v, t));
  };
  return c;
}

namespace {

// Fourth-order central differences; the targets are globally smooth
// expressions, so stencils may cross the domain boundary.
template <class F>
double diff1(F f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) /
         (12.0 * h);
}

template <class F>
double diff2(F f, double x, double h) {
  return (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) -
          f(x - 2.0 * h)) /
         (12.0 * h * h);
}

}  // namespace

double mms_residual_check(const MMSCase& c, int samples_per_axis) {
  if (samples_per_axis < 2) {
    throw ValidationError("residual check: need at least two samples per axis");
  }
  const KineticsSpec ks = with_level(c);
  const double ht = 1e-3;  // first derivatives
  const double hs = 4e-3;  // second derivatives (larger step tames roundoff)
  const int S = samples_per_axis;
  auto coord = [S](int i) { return static_cast<double>(i) / (S - 1); };

  // Simpson rule over the transmission wall, independent of the source forms.
  auto wall_integral = [&](double x, double t) {
    const int n = 40;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      sum += w * c.w2(x, 1.0, static_cast<double>(k) / n, t);
    }
    return sum / (3.0 * n);
  };

  double worst = 0.0;
  auto track = [&worst](double r) { worst = std::max(worst, std::abs(r)); };

  for (int it = 0; it < S; ++it) {
    const double t = c.t_final * coord(it);
    for (int ix = 0; ix < S; ++ix) {
      const double x = coord(ix);

      for (int iu = 0; iu < S; ++iu) {
        const double u = coord(iu);
        for (int iv = 0; iv < S; ++iv) {
          const double v = coord(iv);
          const double w1 = c.w1(x, u, v, t);
          const double w2 = c.w2(x, u, v, t);
          const double lap1 =
              diff2([&](double p) { return c.w1(x, p, v, t); }, u, hs) +
              diff2([&](double p) { return c.w1(x, u, p, t); }, v, hs);
          const double lap2 =
              diff2([&](double p) { return c.w2(x, p, v, t); }, u, hs) +
              diff2([&](double p) { return c.w2(x, u, p, t); }, v, hs);
          track(diff1([&](double p) { return c.w1(x, u, v, p); }, t, ht) -
                c.d1 * lap1 + eval_f(ks, 1, w1) - eval_f(ks, 2, w2) -
                c.g1(x, u, v, t));
          track(diff1([&](double p) { return c.w2(x, u, v, p); }, t, ht) -
                c.d2 * lap2 + eval_f(ks, 2, w2) - eval_f(ks, 1, w1) -
                c.g2(x, u, v, t));
        }
      }

      for (int iv = 0; iv < S; ++iv) {
        const double v = coord(iv);
        // Reactive wall: -d1 dw1/dnu = eta - s1 at u = 0; w2 insulated there.
        const double du1_0 = diff1([&](double p) { return c.w1(x, p, v, t); }, 0.0, ht);
        track(c.d1 * du1_0 - eval_eta(ks, c.w1(x, 0.0, v, t), c.w4(x, v, t)) +
              c.s1(x, v, t));
        track(c.d2 * diff1([&](double p) { return c.w2(x, p, v, t); }, 0.0, ht));
        // Transmission wall: -d2 dw2/dnu = alpha (w2 - H w3) - s2 at u = 1.
        const double du2_1 = diff1([&](double p) { return c.w2(x, p, v, t); }, 1.0, ht);
        track(-c.d2 * du2_1 -
              ks.alpha * (c.w2(x, 1.0, v, t) - ks.henry * c.w3(x, t)) +
              c.s2(x, v, t));
        track(c.d1 * diff1([&](double p) { return c.w1(x, p, v, t); }, 1.0, ht));
        // Insulated pair at v = 0 and v = 1.
        for (const double vb : {0.0, 1.0}) {
          const double uu = v;  // reuse the sample as the tangential coordinate
          track(c.d1 * diff1([&](double p) { return c.w1(x, uu, p, t); }, vb, ht));
          track(c.d2 * diff1([&](double p) { return c.w2(x, uu, p, t); }, vb, ht));
        }
        // Surface rate.
        track(diff1([&](double p) { return c.w4(x, v, p); }, t, ht) -
              eval_eta(ks, c.w1(x, 0.0, v, t), c.w4(x, v, t)) - c.s4(x, v, t));
      }

      // Macro rod with the wall-exchange sink.
      track(diff1([&](double p) { return c.w3(x, p); }, t, ht) -
            c.d3 * diff2([&](double p) { return c.w3(p, t); }, x, hs) +
            c.exchange_scale * ks.alpha *
                (ks.henry * c.w3(x, t) - wall_integral(x, t)) -
            c.s3(x, t));
    }
    // Far rod end is flux-free.
    track(c.d3 * diff1([&](double p) { return c.w3(p, t); }, 1.0, ht));
  }
  return worst;
}

namespace {

RunConfig level_config(const MMSCase& c, int level, RefinementMode mode,
                       const RunConfig* knobs) {
  RunConfig cfg;
  if (knobs) {
    cfg.slab_steps = knobs->slab_steps;
    cfg.tol_fp_outer = knobs->tol_fp_outer;
    cfg.tol_fp_inner = knobs->tol_fp_inner;
    cfg.tol_newton = knobs->tol_newton;
    cfg.tol_pos = knobs->tol_pos;
    cfg.max_outer = knobs->max_outer;
    cfg.max_inner = knobs->max_inner;
    cfg.max_newton = knobs->max_newton;
    cfg.lumped = knobs->lumped;
    cfg.schur = knobs->schur;
    cfg.gauss_seidel = knobs->gauss_seidel;
  }
  const int f = 1 << level;
  if (mode == RefinementMode::Space) {
    cfg.macro_elements = c.base_macro_elements * f;
    cfg.micro_nx = cfg.micro_ny = c.base_micro * f;
    cfg.dt = c.base_dt / (static_cast<double>(f) * f);
  } else {
    cfg.macro_elements = c.base_macro_elements;
    cfg.micro_nx = cfg.micro_ny = c.base_micro;
    cfg.dt = c.base_dt / f;
  }
  cfg.macro_length = 1.0;
  cfg.t_final = c.t_final;
  cfg.output_every = cfg.total_steps();
  cfg.kinetics = c.kinetics;
  cfg.trunc_m = c.trunc_level;
  cfg.d1 = c.d1;
  cfg.d2 = c.d2;
  cfg.d3 = c.d3;
  cfg.exchange_scale = c.exchange_scale;
  return cfg;
}

struct FieldErrors {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
};

FieldErrors measure_errors(const MMSCase& c, const OperatorSet& ops,
                           const TwoScaleState& st) {
  const double T = st.t;
  auto sq = [](double r) { return r * r; };
  double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
  for (int i = 0; i < ops.n_macro(); ++i) {
    const double x = ops.macro.nodes[i];
    double c1 = 0.0, c2 = 0.0, c4 = 0.0;
    for (int n = 0; n < ops.n_micro(); ++n) {
      const double u = ops.micro.nodes[n][0];
      const double v = ops.micro.nodes[n][1];
      c1 += ops.micro_lumped[n] * sq(st.w1[i][n] - c.w1(x, u, v, T));
      c2 += ops.micro_lumped[n] * sq(st.w2[i][n] - c.w2(x, u, v, T));
    }
    for (int k = 0; k < ops.gamma1.size(); ++k) {
      const double v = ops.micro.nodes[ops.gamma1.nodes[k]][1];
      c4 += ops.gamma1.weights[k] * sq(st.w4[i][k] - c.w4(x, v, T));
    }
    e1 += ops.macro_weights[i] * c1;
    e2 += ops.macro_weights[i] * c2;
    e4 += ops.macro_weights[i] * c4;
    e3 += ops.macro_weights[i] * sq(st.w3[i] - c.w3(x, T));
  }
  return {std::sqrt(e1), std::sqrt(e2), std::sqrt(e3), std::sqrt(e4)};
}

/// Least-squares slope of log(err) against log(var); entries at roundoff are
/// excluded so exact cases report NaN instead of noise.
double fitted_order(const std::vector<double>& var, const std::vector<double>& err) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < var.size(); ++i) {
    if (err[i] <= 1e-13) {
      continue;
    }
    const double lx = std::log(var[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  if (m < 2 || !(std::abs(denom) > 0.0)) {
    return kNaN;
  }
  return (m * sxy - sx * sy) / denom;
}

double step_order(double var_prev, double var, double err_prev, double err) {
  if (err_prev <= 1e-13 || err <= 1e-13) {
    return kNaN;
  }
  return std::log(err_prev / err) / std::log(var_prev / var);
}

}  // namespace

ConvergenceTable run_mms_study(const MMSCase& c, int depth, RefinementMode mode,
                               const RunConfig* solver_knobs) {
  if (depth < 3) {
    throw ValidationError("convergence study: need at least three levels");
  }
  ConvergenceTable table;
  table.mode = mode;
  table.levels.resize(depth);

  for (int level = 0; level < depth; ++level) {
    const RunConfig cfg = level_config(c, level, mode, solver_knobs);
    cfg.validate();

    DiffusivityField diff;
    diff.d1 = {c.d1};
    diff.d2 = {c.d2};
    diff.d3 = {c.d3};
    const OperatorSet ops =
        build_operator_set(build_macro_mesh(cfg.macro_elements, cfg.macro_length),
                           build_micro_mesh(cfg.micro_nx, cfg.micro_ny), diff,
                           cfg.lumped);
    const int n_mi = ops.n_micro();
    const int n_ma = ops.n_macro();

    SourceHooks hooks;
    auto cell_field = [&](const std::function<double(double, double, double, double)>& f,
                          double t, int cell) {
      Vector out(n_mi);
      const double x = ops.macro.nodes[cell];
      for (int n = 0; n < n_mi; ++n) {
        out[n] = f(x, ops.micro.nodes[n][0], ops.micro.nodes[n][1], t);
      }
      return out;
    };
    auto wall_field = [&](const std::function<double(double, double, double)>& f,
                          const BoundaryOperator& wall, double t, int cell) {
      Vector out(wall.size());
      const double x = ops.macro.nodes[cell];
      for (int k = 0; k < wall.size(); ++k) {
        out[k] = f(x, ops.micro.nodes[wall.nodes[k]][1], t);
      }
      return out;
    };
    hooks.g1 = [&](double t, int cell) { return cell_field(c.g1, t, cell); };
    hooks.g2 = [&](double t, int cell) { return cell_field(c.g2, t, cell); };
    hooks.s1 = [&](double t, int cell) { return wall_field(c.s1, ops.gamma1, t, cell); };
    hooks.s2 = [&](double t, int cell) { return wall_field(c.s2, ops.gamma2, t, cell); };
    hooks.s4 = [&](double t, int cell) { return wall_field(c.s4, ops.gamma1, t, cell); };
    hooks.g3 = [&](double t) {
      Vector out(n_ma);
      for (int j = 0; j < n_ma; ++j) {
        out[j] = c.s3(ops.macro.nodes[j], t);
      }
      return out;
    };

    TwoScaleState init;
    init.w1.resize(n_ma);
    init.w2.resize(n_ma);
    init.w4.resize(n_ma);
    init.w3.resize(n_ma);
    for (int i = 0; i < n_ma; ++i) {
      init.w1[i] = cell_field(c.w1, 0.0, i);
      init.w2[i] = cell_field(c.w2, 0.0, i);
      init.w4[i] = wall_field(c.w4, ops.gamma1, 0.0, i);
      init.w3[i] = c.w3(ops.macro.nodes[i], 0.0);
    }

    const DirichletDatum datum{[&c](double t) { return c.w3(0.0, t); },
                               [](double) { return 0.0; }};
    RunOverrides ov;
    ov.hooks = &hooks;
    ov.initial_state = &init;
    ov.dirichlet = &datum;

    const RunResult r = run(cfg, ov);
    const FieldErrors e = measure_errors(c, ops, r.snapshots.back());

    ConvergenceLevel& row = table.levels[level];
    row.level = level;
    row.h = 1.0 / cfg.micro_nx;
    row.dt = cfg.dt;
    row.err_w1 = e.w1;
    row.err_w2 = e.w2;
    row.err_w3 = e.w3;
    row.err_w4 = e.w4;
  }

  auto refine_var = [&](const ConvergenceLevel& row) {
    return mode == RefinementMode::Space ? row.h : row.dt;
  };
  const std::array<double ConvergenceLevel::*, 4> errs = {
      &ConvergenceLevel::err_w1, &ConvergenceLevel::err_w2,
      &ConvergenceLevel::err_w3, &ConvergenceLevel::err_w4};
  const std::array<double ConvergenceLevel::*, 4> orders = {
      &ConvergenceLevel::order_w1, &ConvergenceLevel::order_w2,
      &ConvergenceLevel::order_w3, &ConvergenceLevel::order_w4};
  std::array<double*, 4> fitted = {&table.fitted_w1, &table.fitted_w2,
                                   &table.fitted_w3, &table.fitted_w4};
  for (std::size_t f = 0; f < 4; ++f) {
    std::vector<double> vars, es;
    for (auto& row : table.levels) {
      vars.push_back(refine_var(row));
      es.push_back(row.*errs[f]);
    }
    table.levels[0].*orders[f] = kNaN;
    for (std::size_t l = 1; l < table.levels.size(); ++l) {
      table.levels[l].*orders[f] = step_order(vars[l - 1], vars[l], es[l - 1], es[l]);
    }
    *fitted[f] = fitted_order(vars, es);
  }
  return table;
}

void write_convergence_table(const ConvergenceTable& table, std::ostream& out) {
  out << "level,h,dt,err_w1,err_w2,err_w3,err_w4,"
         "order_w1,order_w2,order_w3,order_w4\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const ConvergenceLevel& row : table.levels) {
    out << row.level << ',';
    put(row.h, ',');
    put(row.dt, ',');
    put(row.err_w1, ',');
    put(row.err_w2, ',');
    put(row.err_w3, ',');
    put(row.err_w4, ',');
    put(row.order_w1, ',');
    put(row.order_w2, ',');
    put(row.order_w3, ',');
    put(row.order_w4, '\n');
  }
}

}  // namespace twoscale
