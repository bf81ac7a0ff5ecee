#include "twoscale/fem.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "twoscale/errors.hpp"

using namespace twoscale;

namespace {

Vector nodal(const MicroMesh& mesh, double (*f)(double, double)) {
  Vector v(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    v[i] = f(mesh.nodes[i][0], mesh.nodes[i][1]);
  }
  return v;
}

}  // namespace

TEST_CASE("stiffness rows sum to zero on both meshes") {
  const MacroMesh macro = build_macro_mesh(7, 2.5);
  const SparseOperator k1 = assemble_stiffness(macro, {0.3}, 1e-12);
  const Vector ones1 = Vector::Ones(macro.node_count());
  CHECK((k1 * ones1).lpNorm<Eigen::Infinity>() <= 1e-13);

  const MicroMesh micro = build_micro_mesh(6, 4, 1.5, 0.5);
  const SparseOperator k2 = assemble_stiffness(micro, {0.8}, 1e-12);
  const Vector ones2 = Vector::Ones(micro.node_count());
  CHECK((k2 * ones2).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("linear fields reproduce their exact Dirichlet energy") {
  // u = 2x - 3y has |grad u|^2 = 13, so the energy is d * 13 * area.
  const MicroMesh mesh = build_micro_mesh(5, 7, 2.0, 0.5);
  const SparseOperator k = assemble_stiffness(mesh, {0.7}, 1e-12);
  const Vector u = nodal(mesh, [](double x, double y) { return 2.0 * x - 3.0 * y; });
  CHECK(u.dot(k * u) == doctest::Approx(0.7 * 13.0 * 1.0).epsilon(1e-12));
}

TEST_CASE("macro stiffness energy of an interpolated parabola") {
  const MacroMesh mesh = build_macro_mesh(8, 2.0);
  const double d = 0.4;
  const SparseOperator k = assemble_stiffness(mesh, std::vector<double>(8, d), 1e-12);
  Vector u(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    u[i] = mesh.nodes[i] * mesh.nodes[i];
  }
  double expected = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double slope = mesh.nodes[e + 1] + mesh.nodes[e];
    expected += d * mesh.element_length(e) * slope * slope;
  }
  CHECK(u.dot(k * u) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mass operators integrate to the domain size") {
  const MacroMesh macro = build_macro_mesh(9, 1.7);
  const MicroMesh micro = build_micro_mesh(4, 5, 1.25, 0.8);
  for (const bool lumped : {true, false}) {
    const Vector ones_ma = Vector::Ones(macro.node_count());
    const Vector ones_mi = Vector::Ones(micro.node_count());
    CHECK(ones_ma.dot(assemble_mass(macro, lumped) * ones_ma) ==
          doctest::Approx(1.7).epsilon(1e-12));
    CHECK(ones_mi.dot(assemble_mass(micro, lumped) * ones_mi) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("lumped and consistent mass agree on constants") {
  const MicroMesh micro = build_micro_mesh(6, 6);
  const Vector ones = Vector::Ones(micro.node_count());
  const Vector ml = assemble_mass(micro, true) * ones;
  const Vector mc = assemble_mass(micro, false) * ones;
  CHECK((ml - mc).lpNorm<Eigen::Infinity>() <= 1e-14);

  const MacroMesh macro = build_macro_mesh(5, 3.0);
  const Vector ones1 = Vector::Ones(macro.node_count());
  const Vector ml1 = assemble_mass(macro, true) * ones1;
  const Vector mc1 = assemble_mass(macro, false) * ones1;
  CHECK((ml1 - mc1).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("two-element macro stiffness has the textbook entries") {
  const MacroMesh mesh = build_macro_mesh(2, 1.0);
  const SparseOperator k = assemble_stiffness(mesh, {2.0, 2.0}, 1e-12);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(k);
  Eigen::MatrixXd expected(3, 3);
  expected << 4.0, -4.0, 0.0, -4.0, 8.0, -4.0, 0.0, -4.0, 4.0;
  CHECK((dense - expected).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("micro stiffness off-diagonals are non-positive") {
  const MicroMesh mesh = build_micro_mesh(5, 3, 2.0, 0.5);
  REQUIRE(is_non_obtuse(mesh));
  const SparseOperator k = assemble_stiffness(mesh, {1.0}, 1e-12);
  for (int c = 0; c < k.outerSize(); ++c) {
    for (SparseOperator::InnerIterator it(k, c); it; ++it) {
      if (it.row() != it.col()) {
        CHECK(it.value() <= 1e-14);
      }
    }
  }
}

TEST_CASE("trace indices walk each wall in order") {
  const MicroMesh mesh = build_micro_mesh(3, 4);
  const auto g1 = trace_indices(mesh, BoundaryTag::Gamma1);
  const auto g2 = trace_indices(mesh, BoundaryTag::Gamma2);
  const auto outer = trace_indices(mesh, BoundaryTag::Outer);
  REQUIRE(g1.size() == 5);
  REQUIRE(g2.size() == 5);
  REQUIRE(outer.size() == 8);
  for (std::size_t k = 0; k < g1.size(); ++k) {
    CHECK(mesh.nodes[g1[k]][0] == 0.0);
    CHECK(mesh.nodes[g1[k]][1] == doctest::Approx(0.25 * k));
    CHECK(mesh.nodes[g2[k]][0] == doctest::Approx(1.0));
  }
}

TEST_CASE("boundary mass totals the wall measure in both modes") {
  const MicroMesh mesh = build_micro_mesh(4, 6, 2.0, 0.5);
  for (const bool lumped : {true, false}) {
    const BoundaryOperator g1 = assemble_boundary_mass(mesh, BoundaryTag::Gamma1, lumped);
    CHECK(g1.total_mass() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g1.measure == doctest::Approx(0.5).epsilon(1e-12));
    const BoundaryOperator outer =
        assemble_boundary_mass(mesh, BoundaryTag::Outer, lumped);
    CHECK(outer.total_mass() == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("boundary quadrature integrates a linear trace exactly") {
  // On the right wall, integrate v(y) = y over [0, ly]: ly^2 / 2.
  const MicroMesh mesh = build_micro_mesh(3, 5, 1.0, 2.0);
  for (const bool lumped : {true, false}) {
    const BoundaryOperator g2 = assemble_boundary_mass(mesh, BoundaryTag::Gamma2, lumped);
    Vector field(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) {
      field[i] = mesh.nodes[i][1];
    }
    const Vector trace = g2.gather(field);
    CHECK(g2.weights.dot(trace) == doctest::Approx(2.0).epsilon(1e-12));
    const Vector ones = Vector::Ones(g2.size());
    CHECK(ones.dot(g2.mass * trace) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("gather and scatter round-trip through global indexing") {
  const MicroMesh mesh = build_micro_mesh(3, 3);
  const BoundaryOperator g1 = assemble_boundary_mass(mesh, BoundaryTag::Gamma1, true);
  Vector field = Vector::Zero(mesh.node_count());
  Vector trace(g1.size());
  for (int k = 0; k < g1.size(); ++k) {
    trace[k] = 1.0 + k;
  }
  g1.scatter_add(trace, field);
  const Vector back = g1.gather(field);
  CHECK((back - trace).lpNorm<Eigen::Infinity>() == 0.0);

  const SparseOperator global = g1.global_mass(mesh.node_count());
  const Vector ones = Vector::Ones(mesh.node_count());
  CHECK(ones.dot(global * ones) == doctest::Approx(1.0).epsilon(1e-12));
  const Vector gw = g1.global_weights(mesh.node_count());
  CHECK(gw.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gw.maxCoeff() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("assembly is bit-deterministic") {
  const MicroMesh mesh = build_micro_mesh(5, 4, 1.1, 0.9);
  std::ostringstream a, b;
  dump_operator(assemble_stiffness(mesh, {0.37}, 1e-12), a);
  dump_operator(assemble_stiffness(mesh, {0.37}, 1e-12), b);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("operator set bundles the pieces consistently") {
  const MacroMesh macro = build_macro_mesh(4, 1.0);
  const MicroMesh micro = build_micro_mesh(3, 3);
  DiffusivityField diff;
  diff.d1 = {0.1};
  diff.d2 = {0.2};
  diff.d3 = {0.3};
  const OperatorSet ops = build_operator_set(macro, micro, diff, true);
  CHECK(ops.n_macro() == 5);
  CHECK(ops.n_micro() == 16);
  CHECK(ops.macro_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ops.macro_weights[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(ops.macro_weights[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ops.micro_lumped.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ops.gamma1.measure == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ops.gamma2_weights_global.sum() == doctest::Approx(1.0).epsilon(1e-12));

  DiffusivityField bad = diff;
  bad.d2 = {0.2, 0.2};
  CHECK_THROWS_AS(build_operator_set(macro, micro, bad, true), ValidationError);
}

TEST_CASE("stiffness assembly rejects values under the floor") {
  const MicroMesh mesh = build_micro_mesh(2, 2);
  CHECK_THROWS_AS(assemble_stiffness(mesh, {1e-13}, 1e-12), EllipticityViolation);
  CHECK_THROWS_AS(assemble_stiffness(mesh, {0.0}, 0.0), EllipticityViolation);
}
