#include "twoscale/micro_vi.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "twoscale/errors.hpp"

using namespace twoscale;

namespace {

OperatorSet small_ops(int n = 2, bool lumped = true, double d1 = 0.1) {
  DiffusivityField diff;
  diff.d1 = {d1};
  diff.d2 = {0.1};
  diff.d3 = {0.1};
  return build_operator_set(build_macro_mesh(2, 1.0), build_micro_mesh(n, n), diff,
                            lumped);
}

// Independent solve of the implicit cell step by relaxed fixed point on the
// wall term, using dense algebra throughout.
Vector dense_reference_step(const Vector& w_prev, const Vector& g, const Vector& h,
                            double dt, const OperatorSet& ops,
                            const KineticsSpec& spec) {
  const int n = ops.n_micro();
  const Eigen::MatrixXd k_step =
      Eigen::MatrixXd(ops.micro_mass) / dt + Eigen::MatrixXd(ops.micro_stiff_d1);
  const Eigen::MatrixXd k_inv = k_step.inverse();
  const Vector base = Eigen::MatrixXd(ops.micro_mass) * (w_prev / dt + g);
  Vector w = w_prev;
  for (int it = 0; it < 400; ++it) {
    Vector rhs = base;
    for (int k = 0; k < ops.gamma1.size(); ++k) {
      const int node = ops.gamma1.nodes[k];
      rhs[node] -= ops.gamma1.weights[k] * h[k] * eval_R(spec, w[node]);
    }
    const Vector next = k_inv * rhs;
    w = 0.3 * w + 0.7 * next;
  }
  (void)n;
  return w;
}

}  // namespace

TEST_CASE("implicit cell step satisfies its residual equation") {
  for (const bool lumped : {true, false}) {
    const OperatorSet ops = small_ops(3, lumped);
    KineticsSpec spec;
    spec.k_R = 1.0;
    spec.k_Q = 1.0;
    spec.beta_max = 1.0;

    Vector w_prev(ops.n_micro());
    for (int i = 0; i < ops.n_micro(); ++i) {
      w_prev[i] = 0.2 + 0.1 * ops.micro.nodes[i][0] + 0.05 * ops.micro.nodes[i][1];
    }
    const Vector g = Vector::Constant(ops.n_micro(), 0.3);
    const Vector h = Vector::Constant(ops.gamma1.size(), 0.8);
    const double dt = 1e-2;

    const Vector w = p1_step(w_prev, g, h, dt, ops, spec);

    Vector res = ops.micro_mass * ((w - w_prev) / dt - g) + ops.micro_stiff_d1 * w;
    for (int k = 0; k < ops.gamma1.size(); ++k) {
      const int node = ops.gamma1.nodes[k];
      res[node] += ops.gamma1.weights[k] * h[k] * eval_R(spec, w[node]);
    }
    CHECK(res.lpNorm<Eigen::Infinity>() <= 1e-11);

    const Vector ref = dense_reference_step(w_prev, g, h, dt, ops, spec);
    CHECK((w - ref).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("cell step with superlinear wall rate matches the dense reference") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 2.0;
  spec.p_R = 2.0;
  const Vector w_prev = Vector::Constant(ops.n_micro(), 0.5);
  const Vector g = Vector::Zero(ops.n_micro());
  const Vector h = Vector::Constant(ops.gamma1.size(), 1.5);
  const Vector w = p1_step(w_prev, g, h, 5e-3, ops, spec);
  const Vector ref = dense_reference_step(w_prev, g, h, 5e-3, ops, spec);
  CHECK((w - ref).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("a resting state stays bitwise untouched") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  const Vector w_prev = Vector::Constant(ops.n_micro(), 0.7);
  const Vector g = Vector::Zero(ops.n_micro());
  const Vector h = Vector::Zero(ops.gamma1.size());
  const Vector w = p1_step(w_prev, g, h, 1e-3, ops, spec);
  CHECK((w - w_prev).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("cell step keeps nonnegative data nonnegative") {
  const OperatorSet ops = small_ops(4);
  KineticsSpec spec;
  spec.k_R = 2.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    Vector w_prev(ops.n_micro()), g(ops.n_micro());
    for (int i = 0; i < ops.n_micro(); ++i) {
      w_prev[i] = uni(rng);
      g[i] = 0.5 * uni(rng);
    }
    Vector h(ops.gamma1.size());
    for (int k = 0; k < h.size(); ++k) {
      h[k] = 2.0 * uni(rng);
    }
    const Vector w = p1_step(w_prev, g, h, 2e-3, ops, spec);
    CHECK(w.minCoeff() >= -1e-13);
  }
}

TEST_CASE("a stronger wall sink never increases the solution") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  const Vector w_prev = Vector::Constant(ops.n_micro(), 0.4);
  const Vector g = Vector::Constant(ops.n_micro(), 0.1);
  const Vector weak = Vector::Constant(ops.gamma1.size(), 0.2);
  const Vector strong = Vector::Constant(ops.gamma1.size(), 1.2);
  const Vector w_weak = p1_step(w_prev, g, weak, 1e-2, ops, spec);
  const Vector w_strong = p1_step(w_prev, g, strong, 1e-2, ops, spec);
  CHECK((w_strong - w_weak).maxCoeff() <= 1e-12);
}

TEST_CASE("cell step validates its inputs") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  const Vector w_prev = Vector::Zero(ops.n_micro());
  const Vector g = Vector::Zero(ops.n_micro());
  Vector h = Vector::Zero(ops.gamma1.size());
  CHECK_THROWS_AS(p1_step(w_prev, g, h, 0.0, ops, spec), ValidationError);
  CHECK_THROWS_AS(p1_step(Vector::Zero(3), g, h, 1e-3, ops, spec), ValidationError);
  h[0] = -0.1;
  CHECK_THROWS_AS(p1_step(w_prev, g, h, 1e-3, ops, spec), ValidationError);
}

TEST_CASE("newton failure carries the last residual") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 4.0;
  spec.p_R = 3.0;
  P1Options opt;
  opt.max_newton = 0;
  const Vector w_prev = Vector::Constant(ops.n_micro(), 0.9);
  const Vector g = Vector::Constant(ops.n_micro(), 1.0);
  const Vector h = Vector::Constant(ops.gamma1.size(), 2.0);
  try {
    p1_step(w_prev, g, h, 1e-2, ops, spec, opt);
    FAIL("expected NewtonFailure");
  } catch (const NewtonFailure& e) {
    CHECK(e.last_residual > 0.0);
  }
}

TEST_CASE("step inequality holds for accepted steps and flags wrong fields") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  spec.k_R = 1.5;
  spec.p_R = 1.0;
  const Vector w_prev = Vector::Constant(ops.n_micro(), 0.6);
  Vector g(ops.n_micro());
  for (int i = 0; i < ops.n_micro(); ++i) {
    g[i] = 0.2 * ops.micro.nodes[i][0];
  }
  const Vector h = Vector::Constant(ops.gamma1.size(), 0.9);
  const double dt = 1e-2;
  const Vector w = p1_step(w_prev, g, h, dt, ops, spec);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int probe = 0; probe < 50; ++probe) {
    Vector v(ops.n_micro());
    for (int i = 0; i < ops.n_micro(); ++i) {
      v[i] = w[i] + 0.5 * uni(rng);
    }
    CHECK(p1_vi_residual(w, w_prev, g, h, v, dt, ops, spec) <= 1e-12);
  }
  CHECK(p1_vi_residual(w, w_prev, g, h, w, dt, ops, spec) == 0.0);

  Vector wrong = w;
  wrong[ops.gamma1.nodes[0]] += 0.2;
  double worst = 0.0;
  for (int probe = 0; probe < 50; ++probe) {
    Vector v(ops.n_micro());
    for (int i = 0; i < ops.n_micro(); ++i) {
      v[i] = wrong[i] + 0.5 * uni(rng);
    }
    worst = std::max(worst, p1_vi_residual(wrong, w_prev, g, h, v, dt, ops, spec));
  }
  CHECK(worst > 1e-6);
}

TEST_CASE("slab coupling reproduces an independent dense fixed point") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 1.0;
  spec.k_Q = 2.0;
  spec.beta_max = 0.5;
  const int steps = 4;
  const double dt = 5e-3;

  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.4);
  start.w4 = Vector::Constant(ops.gamma1.size(), 0.1);
  const std::vector<Vector> g_path(steps + 1, Vector::Constant(ops.n_micro(), 0.05));

  const P2Result got = p2_slab(start, g_path, steps, dt, ops, spec);
  REQUIRE(got.report.converged);

  // Independent re-implementation: dense steps, trapezoid, Picard.
  std::vector<Vector> w4_bar(steps + 1, start.w4);
  std::vector<Vector> w1(steps + 1), w4(steps + 1);
  for (int it = 0; it < 80; ++it) {
    w1[0] = start.w1;
    for (int k = 1; k <= steps; ++k) {
      Vector h(ops.gamma1.size());
      for (int j = 0; j < h.size(); ++j) {
        h[j] = eval_Q(spec, w4_bar[k][j]);
      }
      w1[k] = dense_reference_step(w1[k - 1], g_path[k], h, dt, ops, spec);
    }
    auto eta = [&](int k) {
      Vector e(ops.gamma1.size());
      for (int j = 0; j < e.size(); ++j) {
        e[j] = eval_R(spec, w1[k][ops.gamma1.nodes[j]]) * eval_Q(spec, w4_bar[k][j]);
      }
      return e;
    };
    w4[0] = start.w4;
    for (int k = 1; k <= steps; ++k) {
      w4[k] = w4[k - 1] + 0.5 * dt * (eta(k - 1) + eta(k));
    }
    w4_bar = w4;
    w4_bar[0] = start.w4;
  }
  for (int k = 0; k <= steps; ++k) {
    CHECK((got.path[k].w1 - w1[k]).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((got.path[k].w4 - w4[k]).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(got.path[k].t == doctest::Approx(k * dt));
  }
}

TEST_CASE("inactive surface rate converges in one application with ratio zero") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_Q = 0.0;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.4);
  start.w4 = Vector::Constant(ops.gamma1.size(), 0.2);
  const std::vector<Vector> g_path(4, Vector::Zero(ops.n_micro()));
  const P2Result r = p2_slab(start, g_path, 3, 1e-3, ops, spec);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.contraction_ratio == 0.0);
  for (const auto& s : r.path) {
    CHECK((s.w4 - start.w4).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("saturated surface freezes the product and the wall flux") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  spec.k_R = 2.0;
  spec.k_Q = 1.0;
  spec.beta_max = 0.3;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.8);
  start.w4 = Vector::Constant(ops.gamma1.size(), spec.beta_max);
  const std::vector<Vector> g_path(6, Vector::Zero(ops.n_micro()));
  const P2Result r = p2_slab(start, g_path, 5, 1e-2, ops, spec);
  for (const auto& s : r.path) {
    CHECK((s.w4 - start.w4).lpNorm<Eigen::Infinity>() == 0.0);
    // With Q == 0 the wall is insulated, so the cell field only relaxes; the
    // total cell mass must stay put.
    const Vector ones = Vector::Ones(ops.n_micro());
    CHECK(ones.dot(ops.micro_mass * s.w1) ==
          doctest::Approx(ones.dot(ops.micro_mass * start.w1)).epsilon(1e-12));
  }
}

TEST_CASE("converged surface product never overshoots the cap") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 1.0;
  spec.k_Q = 9.0;  // dt * R * Q-slope stays below the trapezoid stability bound
  spec.beta_max = 0.2;
  CellState state;
  state.w1 = Vector::Constant(ops.n_micro(), 1.0);
  state.w4 = Vector::Zero(ops.gamma1.size());
  const std::vector<Vector> g_path(2, Vector::Constant(ops.n_micro(), 0.5));
  // March one step per slab: long slabs leave the contraction regime.
  for (int step = 0; step < 40; ++step) {
    const P2Result r = p2_slab(state, g_path, 1, 0.05, ops, spec);
    const CellState& next = r.path[1];
    CHECK(next.w4.maxCoeff() <= spec.beta_max + 1e-12);
    CHECK(next.w4.minCoeff() >= -1e-14);
    // Monotone growth toward the cap.
    CHECK((next.w4 - state.w4).minCoeff() >= -1e-14);
    state = next;
  }
  CHECK(state.w4.maxCoeff() > 0.5 * spec.beta_max);
}

TEST_CASE("surface source path integrates exactly by the trapezoid rule") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 0.0;  // only the prescribed source drives w4
  const int steps = 5;
  const double dt = 0.1;
  std::vector<Vector> s4(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    s4[k] = Vector::Constant(ops.gamma1.size(), 2.0 * (k * dt) + 1.0);
  }
  P2Options opt;
  opt.w4_source_path = &s4;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.1);
  start.w4 = Vector::Zero(ops.gamma1.size());
  const std::vector<Vector> g_path(steps + 1, Vector::Zero(ops.n_micro()));
  const P2Result r = p2_slab(start, g_path, steps, dt, ops, spec, opt);
  // integral of (2t + 1) from 0 to T, exact for the trapezoid rule.
  const double T = steps * dt;
  CHECK(r.path[steps].w4[0] == doctest::Approx(T * T + T).epsilon(1e-14));
}

TEST_CASE("fixed point reports decreasing residuals and a ratio below one") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  spec.k_R = 1.0;
  spec.k_Q = 1.5;
  spec.beta_max = 1.0;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.9);
  start.w4 = Vector::Zero(ops.gamma1.size());
  const int steps = 8;
  const std::vector<Vector> g_path(steps + 1, Vector::Constant(ops.n_micro(), 0.2));
  const P2Result r = p2_slab(start, g_path, steps, 0.02, ops, spec);
  CHECK(r.report.converged);
  CHECK(r.report.iterations >= 2);
  CHECK(r.report.contraction_ratio < 1.0);
  CHECK(r.report.contraction_ratio > 0.0);
}

TEST_CASE("a starved iteration budget raises with history attached") {
  const OperatorSet ops = small_ops(2);
  KineticsSpec spec;
  spec.k_R = 1.0;
  spec.k_Q = 1.0;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.5);
  start.w4 = Vector::Zero(ops.gamma1.size());
  const std::vector<Vector> g_path(4, Vector::Zero(ops.n_micro()));
  P2Options opt;
  opt.max_fp = 1;
  try {
    p2_slab(start, g_path, 3, 0.05, ops, spec, opt);
    FAIL("expected ContractionFailure");
  } catch (const ContractionFailure& e) {
    CHECK(e.residual_history.size() == 1);
    CHECK(e.residual_history[0] > 0.0);
  }
}

TEST_CASE("warm start reaches the same fixed point faster") {
  const OperatorSet ops = small_ops(3);
  KineticsSpec spec;
  spec.k_R = 1.0;
  spec.k_Q = 1.0;
  spec.beta_max = 0.8;
  CellState start;
  start.w1 = Vector::Constant(ops.n_micro(), 0.6);
  start.w4 = Vector::Constant(ops.gamma1.size(), 0.1);
  const int steps = 6;
  const std::vector<Vector> g_path(steps + 1, Vector::Constant(ops.n_micro(), 0.1));

  const P2Result cold = p2_slab(start, g_path, steps, 0.02, ops, spec);
  std::vector<Vector> warm(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    warm[k] = cold.path[k].w4;
  }
  P2Options opt;
  opt.w4_warm_start = &warm;
  const P2Result hot = p2_slab(start, g_path, steps, 0.02, ops, spec, opt);
  CHECK(hot.report.iterations <= cold.report.iterations);
  for (int k = 0; k <= steps; ++k) {
    CHECK((hot.path[k].w4 - cold.path[k].w4).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}
