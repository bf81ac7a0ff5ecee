#include "twoscale/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

DataProfile DataProfile::constant(double c) {
  DataProfile p;
  p.kind = Kind::Constant;
  p.c0 = c;
  return p;
}

DataProfile DataProfile::linear(double c0, double cx, double cu, double cv) {
  DataProfile p;
  p.kind = Kind::Linear;
  p.c0 = c0;
  p.cx = cx;
  p.cu = cu;
  p.cv = cv;
  return p;
}

DataProfile DataProfile::bump(double c0, double amp) {
  DataProfile p;
  p.kind = Kind::Bump;
  p.c0 = c0;
  p.amp = amp;
  return p;
}

double DataProfile::eval(double x, double u, double v) const {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Linear:
      return c0 + cx * x + cu * u + cv * v;
    case Kind::Bump:
      return c0 + amp * std::sin(kPi * x) * 0.5 * (1.0 + std::cos(kPi * u)) * 0.5 *
                      (1.0 + std::cos(kPi * v));
  }
  return c0;
}

double DataProfile::sup() const {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Linear:
      return c0 + std::max(0.0, cx) + std::max(0.0, cu) + std::max(0.0, cv);
    case Kind::Bump:
      return c0 + std::max(0.0, amp);
  }
  return c0;
}

double DataProfile::inf() const {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Linear:
      return c0 + std::min(0.0, cx) + std::min(0.0, cu) + std::min(0.0, cv);
    case Kind::Bump:
      return c0 + std::min(0.0, amp);
  }
  return c0;
}

TimeProfile TimeProfile::constant(double v0) {
  TimeProfile p;
  p.kind = Kind::Constant;
  p.v0 = v0;
  return p;
}

TimeProfile TimeProfile::ramp(double v0, double slope) {
  TimeProfile p;
  p.kind = Kind::Ramp;
  p.v0 = v0;
  p.rate = slope;
  return p;
}

TimeProfile TimeProfile::exponential(double v0, double rate) {
  TimeProfile p;
  p.kind = Kind::Exponential;
  p.v0 = v0;
  p.rate = rate;
  return p;
}

double TimeProfile::value(double t) const {
  switch (kind) {
    case Kind::Constant:
      return v0;
    case Kind::Ramp:
      return v0 + rate * t;
    case Kind::Exponential:
      return v0 * std::exp(rate * t);
  }
  return v0;
}

double TimeProfile::derivative(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 0.0;
    case Kind::Ramp:
      return rate;
    case Kind::Exponential:
      return v0 * rate * std::exp(rate * t);
  }
  return 0.0;
}

double TimeProfile::sup_on(double t_final) const {
  return std::max(value(0.0), value(t_final));
}

DirichletDatum TimeProfile::datum() const {
  switch (kind) {
    case Kind::Constant:
      return DirichletDatum::constant(v0);
    case Kind::Ramp:
      return DirichletDatum::linear_ramp(v0, rate);
    case Kind::Exponential:
      return DirichletDatum::exponential(v0, rate);
  }
  return DirichletDatum::constant(v0);
}

int RunConfig::total_steps() const {
  return static_cast<int>(std::llround(t_final / dt));
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (macro_elements < 1) fail("macro_elements must be at least 1");
  if (!(macro_length > 0.0) || !std::isfinite(macro_length)) {
    fail("macro_length must be positive");
  }
  if (micro_nx < 1 || micro_ny < 1) fail("micro grid must have at least one cell");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) fail("t_final must be positive");
  const int n = total_steps();
  if (n < 1 || std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
    fail("t_final must be a whole number of steps");
  }
  if (slab_steps < 1) fail("slab_steps must be at least 1");
  if (output_every < 1) fail("output_every must be at least 1");
  for (const double tol : {tol_fp_outer, tol_fp_inner, tol_newton}) {
    if (!(tol > 0.0) || !std::isfinite(tol)) fail("tolerances must be positive");
  }
  if (!(tol_pos >= 0.0) || !std::isfinite(tol_pos)) fail("tol_pos must be nonnegative");
  if (max_outer < 1 || max_inner < 1 || max_newton < 0) {
    fail("iteration budgets must be positive");
  }
  if (!(exchange_scale >= 0.0) || !std::isfinite(exchange_scale)) {
    fail("exchange_scale must be nonnegative");
  }
  for (const double d : {d1, d2, d3}) {
    if (!(d > 0.0) || !std::isfinite(d)) fail("diffusivities must be positive");
  }
  try {
    KineticsSpec spec = kinetics;
    spec.m = trunc_m;
    spec.validate();
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  if (w1_init.inf() < 0.0 || w2_init.inf() < 0.0 || w3_init.inf() < 0.0 ||
      w4_init.inf() < 0.0) {
    fail("initial data must be nonnegative");
  }
  if (w3_dirichlet.value(0.0) < 0.0 || w3_dirichlet.value(t_final) < 0.0) {
    fail("Dirichlet datum must stay nonnegative on the horizon");
  }
}

std::vector<BoundsViolation> check_bounds(const TwoScaleState& state,
                                          const BoundsEnvelope& env, double tol) {
  std::vector<BoundsViolation> out;
  auto scan = [&](const char* name, const Vector& v, double cap, int macro,
                  bool on_trace) {
    for (int k = 0; k < v.size(); ++k) {
      if (v[k] < -tol || v[k] > cap + tol) {
        out.push_back({name, macro, on_trace || v.size() > 1 ? k : -1, v[k],
                       v[k] < -tol ? 0.0 : cap});
      }
    }
  };
  const int n_ma = static_cast<int>(state.w1.size());
  for (int i = 0; i < n_ma; ++i) {
    scan("w1", state.w1[i], env.M1, i, false);
    scan("w2", state.w2[i], env.M2, i, false);
    scan("w4", state.w4[i], env.M4, i, true);
  }
  for (int j = 0; j < state.w3.size(); ++j) {
    if (state.w3[j] < -tol || state.w3[j] > env.M3 + tol) {
      out.push_back({"w3", j, -1, state.w3[j], state.w3[j] < -tol ? 0.0 : env.M3});
    }
  }
  return out;
}

TwoScaleState initial_state(const RunConfig& config, const OperatorSet& ops) {
  TwoScaleState st;
  const int n_ma = ops.n_macro();
  const int n_mi = ops.n_micro();
  const MicroMesh& micro = ops.micro;
  const double length = ops.macro.length();
  st.w1.resize(n_ma);
  st.w2.resize(n_ma);
  st.w4.resize(n_ma);
  st.w3.resize(n_ma);
  for (int i = 0; i < n_ma; ++i) {
    const double x = ops.macro.nodes[i] / length;
    Vector w1(n_mi), w2(n_mi);
    for (int k = 0; k < n_mi; ++k) {
      const double u = micro.nodes[k][0] / micro.lx;
      const double v = micro.nodes[k][1] / micro.ly;
      w1[k] = config.w1_init.eval(x, u, v);
      w2[k] = config.w2_init.eval(x, u, v);
    }
    st.w1[i] = w1;
    st.w2[i] = w2;
    Vector w4(ops.gamma1.size());
    for (int k = 0; k < ops.gamma1.size(); ++k) {
      const auto& p = micro.nodes[ops.gamma1.nodes[k]];
      w4[k] = config.w4_init.eval(x, p[0] / micro.lx, p[1] / micro.ly);
    }
    st.w4[i] = w4;
    st.w3[i] = config.w3_init.eval(x, 0.0, 0.0);
  }
  st.t = 0.0;
  return st;
}

namespace {

void clip_small_negatives(Vector& v, double tol_pos) {
  for (int k = 0; k < v.size(); ++k) {
    if (v[k] < 0.0 && v[k] >= -tol_pos) {
      v[k] = 0.0;
    }
  }
}

void clip_state(TwoScaleState& st, double tol_pos) {
  for (auto& v : st.w1) clip_small_negatives(v, tol_pos);
  for (auto& v : st.w2) clip_small_negatives(v, tol_pos);
  for (auto& v : st.w4) clip_small_negatives(v, tol_pos);
  clip_small_negatives(st.w3, tol_pos);
}

double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

OperatorSet build_ops(const RunConfig& cfg) {
  DiffusivityField diff;
  diff.d1 = {cfg.d1};
  diff.d2 = {cfg.d2};
  diff.d3 = {cfg.d3};
  return build_operator_set(build_macro_mesh(cfg.macro_elements, cfg.macro_length),
                            build_micro_mesh(cfg.micro_nx, cfg.micro_ny), diff,
                            cfg.lumped);
}

double field_max(const std::vector<Vector>& f) {
  double m = 0.0;
  for (const auto& v : f) {
    if (v.size() > 0) {
      m = std::max(m, v.maxCoeff());
    }
  }
  return m;
}

}  // namespace

OuterResult outer_step(const TwoScaleState& state, int n_steps, double dt,
                       const OperatorSet& ops, const KineticsSpec& spec,
                       const P3System& p3, const OuterOptions& opt) {
  const int n_ma = ops.n_macro();
  const int n_mi = ops.n_micro();
  const int n_tr1 = ops.gamma1.size();
  const int n_tr2 = ops.gamma2.size();
  if (static_cast<int>(state.w1.size()) != n_ma ||
      static_cast<int>(state.w2.size()) != n_ma ||
      static_cast<int>(state.w4.size()) != n_ma || state.w3.size() != n_ma) {
    throw ValidationError("outer step: state does not match the meshes");
  }
  if (n_steps < 1) {
    throw ValidationError("outer step: need at least one step");
  }
  const auto K = static_cast<std::size_t>(n_steps);

  // Hook sources on the slab's time grid, evaluated once.
  std::vector<std::vector<Vector>> g1_hook, g2_hook, s1_hook, s4_hook;
  std::vector<std::vector<Vector>> s2_by_step;  // [k][cell]
  std::vector<Vector> g3_by_step;               // [k]
  const SourceHooks* hooks = opt.hooks;
  auto slab_time = [&](std::size_t k) { return state.t + static_cast<double>(k) * dt; };
  if (hooks) {
    auto fill = [&](std::vector<std::vector<Vector>>& dst,
                    const std::function<Vector(double, int)>& fn) {
      if (!fn) return;
      dst.resize(n_ma);
      for (int i = 0; i < n_ma; ++i) {
        dst[i].resize(K + 1);
        for (std::size_t k = 0; k <= K; ++k) {
          dst[i][k] = fn(slab_time(k), i);
        }
      }
    };
    fill(g1_hook, hooks->g1);
    fill(g2_hook, hooks->g2);
    fill(s1_hook, hooks->s1);
    fill(s4_hook, hooks->s4);
    if (hooks->s2) {
      s2_by_step.resize(K + 1);
      for (std::size_t k = 0; k <= K; ++k) {
        s2_by_step[k].resize(n_ma);
        for (int i = 0; i < n_ma; ++i) {
          s2_by_step[k][i] = hooks->s2(slab_time(k), i);
        }
      }
    }
    if (hooks->g3) {
      g3_by_step.resize(K + 1);
      for (std::size_t k = 0; k <= K; ++k) {
        g3_by_step[k] = hooks->g3(slab_time(k));
      }
    }
  }

  // Frozen iterates, one path per cell.
  std::vector<std::vector<Vector>> w1_bar(n_ma), w2_bar(n_ma);
  std::vector<Vector> w3_bar(K + 1, state.w3);
  for (int i = 0; i < n_ma; ++i) {
    w1_bar[i].assign(K + 1, state.w1[i]);
    w2_bar[i].assign(K + 1, state.w2[i]);
  }
  std::vector<std::vector<Vector>> w4_warm;
  if (opt.w4_warm) {
    w4_warm = *opt.w4_warm;
  }

  SlabRecord rec;
  rec.t_start = state.t;
  rec.t_end = slab_time(K);
  rec.steps = n_steps;

  std::vector<std::vector<Vector>> w1_new(n_ma), w4_new(n_ma);
  std::vector<ExchangeState> ex_path;
  bool converged = false;

  for (int outer = 0; outer < opt.max_outer && !converged; ++outer) {
    // Cell sweep with the volume sources frozen at the current iterate.
    double sweep_inner_ratio = 0.0;
    for (int i = 0; i < n_ma; ++i) {
      std::vector<Vector> g1_path(K + 1);
      for (std::size_t k = 0; k <= K; ++k) {
        Vector g(n_mi);
        for (int n = 0; n < n_mi; ++n) {
          g[n] = -eval_f(spec, 1, w1_bar[i][k][n]) + eval_f(spec, 2, w2_bar[i][k][n]);
        }
        if (!g1_hook.empty()) {
          g += g1_hook[i][k];
        }
        g1_path[k] = std::move(g);
      }
      P2Options p2o = opt.p2;
      if (!s1_hook.empty()) {
        p2o.gamma1_source_path = &s1_hook[i];
      }
      if (!s4_hook.empty()) {
        p2o.w4_source_path = &s4_hook[i];
      }
      if (!w4_warm.empty()) {
        p2o.w4_warm_start = &w4_warm[i];
      }
      const CellState start{state.w1[i], state.w4[i], state.t};
      P2Result r = p2_slab(start, g1_path, n_steps, dt, ops, spec, p2o);
      sweep_inner_ratio = std::max(sweep_inner_ratio, r.report.contraction_ratio);
      rec.inner_ratio_max = std::max(rec.inner_ratio_max, r.report.contraction_ratio);
      rec.max_inner_iterations =
          std::max(rec.max_inner_iterations, r.report.iterations);
      w1_new[i].resize(K + 1);
      w4_new[i].resize(K + 1);
      for (std::size_t k = 0; k <= K; ++k) {
        w1_new[i][k] = std::move(r.path[k].w1);
        w4_new[i][k] = std::move(r.path[k].w4);
      }
    }
    if (outer == 0) {
      rec.inner_ratio_first = sweep_inner_ratio;
    }

    // Exchange sweep; optionally sourced from the fresh cell fields.
    const std::vector<std::vector<Vector>>& w1_src =
        opt.gauss_seidel ? w1_new : w1_bar;
    ExchangeState ex;
    ex.w2 = state.w2;
    ex.w3 = state.w3;
    ex.t = state.t;
    std::vector<ExchangeState> ex_new;
    ex_new.reserve(K + 1);
    ex_new.push_back(ex);
    for (std::size_t k = 1; k <= K; ++k) {
      std::vector<Vector> g2(n_ma);
      for (int i = 0; i < n_ma; ++i) {
        Vector g(n_mi);
        for (int n = 0; n < n_mi; ++n) {
          g[n] = eval_f(spec, 1, w1_src[i][k][n]) - eval_f(spec, 2, w2_bar[i][k][n]);
        }
        if (!g2_hook.empty()) {
          g += g2_hook[i][k];
        }
        g2[i] = std::move(g);
      }
      P3Sources src;
      if (!s2_by_step.empty()) {
        src.gamma2 = &s2_by_step[k];
      }
      if (!g3_by_step.empty()) {
        src.macro = &g3_by_step[k];
      }
      ex = p3.step(ex, g2, opt.dirichlet, &src);
      ex_new.push_back(ex);
    }

    // Combined path update in the max norm.
    double res = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      for (int i = 0; i < n_ma; ++i) {
        res = std::max(res, max_abs_diff(w1_new[i][k], w1_bar[i][k]));
        res = std::max(res, max_abs_diff(ex_new[k].w2[i], w2_bar[i][k]));
      }
      res = std::max(res, max_abs_diff(ex_new[k].w3, w3_bar[k]));
    }
    rec.outer_residuals.push_back(res);

    for (int i = 0; i < n_ma; ++i) {
      w1_bar[i] = w1_new[i];
      for (std::size_t k = 0; k <= K; ++k) {
        w2_bar[i][k] = ex_new[k].w2[i];
      }
    }
    for (std::size_t k = 0; k <= K; ++k) {
      w3_bar[k] = ex_new[k].w3;
    }
    w4_warm = w4_new;
    ex_path = std::move(ex_new);
    if (res <= opt.tol_fp_outer) {
      converged = true;
    }
  }
  if (!converged) {
    throw ContractionFailure("volume coupling fixed point stalled",
                             rec.outer_residuals);
  }
  for (std::size_t i = 1; i < rec.outer_residuals.size(); ++i) {
    const double prev = rec.outer_residuals[i - 1];
    if (prev > opt.tol_fp_outer) {
      rec.outer_ratio = std::max(rec.outer_ratio, rec.outer_residuals[i] / prev);
    }
  }

  OuterResult out;
  out.record = std::move(rec);
  out.path.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    TwoScaleState s;
    s.w1.resize(n_ma);
    s.w2 = ex_path[k].w2;
    s.w4.resize(n_ma);
    for (int i = 0; i < n_ma; ++i) {
      s.w1[i] = w1_bar[i][k];
      s.w4[i] = w4_warm[i][k];
    }
    s.w3 = w3_bar[k];
    s.t = slab_time(k);
    out.path[k] = std::move(s);
  }
  out.path[0] = state;
  (void)n_tr1;
  (void)n_tr2;
  return out;
}

BoundsEnvelope profile_envelope(const RunConfig& config) {
  KineticsSpec spec = config.kinetics;
  spec.m.reset();
  spec.validate();
  return compute_bounds_envelope(
      spec, config.w1_init.sup(), config.w2_init.sup(), config.w3_init.sup(),
      std::max(0.0, config.w3_dirichlet.sup_on(config.t_final)),
      config.w4_init.sup());
}

RunResult run(const RunConfig& config, const RunOverrides& overrides) {
  config.validate();
  const OperatorSet ops = build_ops(config);

  KineticsSpec spec = config.kinetics;
  spec.m.reset();
  spec.validate();

  TwoScaleState st;
  if (overrides.initial_state) {
    st = *overrides.initial_state;
    if (static_cast<int>(st.w1.size()) != ops.n_macro() ||
        st.w3.size() != ops.n_macro()) {
      throw ValidationError("run: override state does not match the meshes");
    }
  } else {
    st = initial_state(config, ops);
  }
  st.t = 0.0;

  const int total = config.total_steps();

  double sup10, sup20, sup30, sup40;
  if (overrides.initial_state) {
    sup10 = std::max(0.0, field_max(st.w1));
    sup20 = std::max(0.0, field_max(st.w2));
    sup30 = st.w3.size() ? std::max(0.0, st.w3.maxCoeff()) : 0.0;
    sup40 = std::max(0.0, field_max(st.w4));
  } else {
    sup10 = config.w1_init.sup();
    sup20 = config.w2_init.sup();
    sup30 = config.w3_init.sup();
    sup40 = config.w4_init.sup();
  }
  double sup3d;
  DirichletDatum bc;
  if (overrides.dirichlet) {
    bc = *overrides.dirichlet;
    sup3d = 0.0;
    for (int k = 0; k <= total; ++k) {
      sup3d = std::max(sup3d, bc.value(k * config.dt));
    }
  } else {
    bc = config.w3_dirichlet.datum();
    sup3d = std::max(0.0, config.w3_dirichlet.sup_on(config.t_final));
  }

  RunResult out;
  out.envelope = compute_bounds_envelope(spec, sup10, sup20, sup30, sup3d, sup40);
  spec.m = config.trunc_m ? *config.trunc_m : out.envelope.M0;
  out.kinetics_used = spec;

  P3Options p3opt;
  p3opt.schur = config.schur;
  p3opt.exchange_scale = config.exchange_scale;
  const P3System p3(ops, spec, config.dt, p3opt);

  OuterOptions oopt;
  oopt.tol_fp_outer = config.tol_fp_outer;
  oopt.max_outer = config.max_outer;
  oopt.gauss_seidel = config.gauss_seidel;
  oopt.hooks = overrides.hooks;
  oopt.dirichlet = bc;
  oopt.p2.tol_fp = config.tol_fp_inner;
  oopt.p2.max_fp = config.max_inner;
  oopt.p2.p1.newton_tol = config.tol_newton;
  oopt.p2.p1.max_newton = config.max_newton;

  clip_state(st, config.tol_pos);
  out.snapshots.push_back(st);
  out.snapshot_steps.push_back(0);
  {
    auto viol = check_bounds(st, out.envelope, config.tol_pos);
    if (!viol.empty()) {
      out.diagnostics.violations.emplace_back(st.t, std::move(viol));
    }
  }

  int step = 0;
  while (step < total) {
    int slab = std::min(config.slab_steps, total - step);
    OuterResult res;
    for (;;) {
      try {
        res = outer_step(st, slab, config.dt, ops, spec, p3, oopt);
        break;
      } catch (const ContractionFailure&) {
        if (slab == 1) {
          throw;
        }
        slab = std::max(1, slab / 2);
        ++out.diagnostics.slab_restarts;
      }
    }
    for (int k = 1; k <= slab; ++k) {
      ++step;
      clip_state(res.path[k], config.tol_pos);
      auto viol = check_bounds(res.path[k], out.envelope, config.tol_pos);
      if (!viol.empty()) {
        out.diagnostics.violations.emplace_back(res.path[k].t, std::move(viol));
      }
      if (step % config.output_every == 0 || step == total) {
        out.snapshots.push_back(res.path[k]);
        out.snapshot_steps.push_back(step);
      }
    }
    st = std::move(res.path[slab]);
    out.diagnostics.slabs.push_back(std::move(res.record));
    out.diagnostics.total_outer_iterations +=
        static_cast<int>(out.diagnostics.slabs.back().outer_residuals.size());
  }
  return out;
}

RunConfig default_scenario() {
  RunConfig cfg;
  cfg.kinetics.k_f1 = 0.5;
  cfg.kinetics.k_f2 = 1.0;
  cfg.kinetics.k_R = 2.0;
  cfg.kinetics.k_Q = 1.0;
  cfg.kinetics.beta_max = 1.0;
  cfg.kinetics.henry = 2.0;
  cfg.kinetics.alpha = 1.0;
  cfg.kinetics.p_R = 1.0;
  cfg.d1 = 0.1;
  cfg.d2 = 0.15;
  cfg.d3 = 0.2;
  cfg.w1_init = DataProfile::bump(0.3, 0.2);
  cfg.w2_init = DataProfile::bump(0.4, 0.2);
  cfg.w3_init = DataProfile::bump(0.25, 0.1);
  cfg.w4_init = DataProfile::constant(0.1);
  cfg.w3_dirichlet = TimeProfile::constant(0.25);
  return cfg;
}

StabilityReport stability_probe(const RunConfig& config, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ValidationError("stability probe: delta must be positive");
  }
  const RunResult base = run(config);

  const OperatorSet ops = build_ops(config);
  TwoScaleState shifted = initial_state(config, ops);
  for (auto& v : shifted.w1) v.array() += delta;
  for (auto& v : shifted.w2) v.array() += delta;
  for (auto& v : shifted.w4) v.array() += delta;
  shifted.w3.array() += delta;
  RunOverrides ov;
  ov.initial_state = &shifted;
  const RunResult pert = run(config, ov);

  StabilityReport rep;
  const std::size_t n = std::min(base.snapshots.size(), pert.snapshots.size());
  for (std::size_t s = 0; s < n; ++s) {
    const TwoScaleState& a = base.snapshots[s];
    const TwoScaleState& b = pert.snapshots[s];
    double d = (a.w3 - b.w3).lpNorm<Eigen::Infinity>();
    for (std::size_t i = 0; i < a.w1.size(); ++i) {
      d = std::max(d, max_abs_diff(a.w1[i], b.w1[i]));
      d = std::max(d, max_abs_diff(a.w2[i], b.w2[i]));
      d = std::max(d, max_abs_diff(a.w4[i], b.w4[i]));
    }
    rep.times.push_back(a.t);
    rep.distances.push_back(d);
  }
  rep.initial_distance = rep.distances.empty() ? 0.0 : rep.distances.front();

  // Least-squares slope of log(distance) over time, skipping exact zeros.
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int m = 0;
  for (std::size_t s = 0; s < rep.times.size(); ++s) {
    if (rep.distances[s] <= 0.0) {
      continue;
    }
    const double y = std::log(rep.distances[s]);
    st += rep.times[s];
    sy += y;
    stt += rep.times[s] * rep.times[s];
    sty += rep.times[s] * y;
    ++m;
  }
  const double denom = m * stt - st * st;
  rep.fitted_rate = (m >= 2 && denom > 0.0) ? (m * sty - st * sy) / denom : 0.0;
  return rep;
}

}  // namespace twoscale
