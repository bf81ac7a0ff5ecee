#include "twoscale/geometry.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "twoscale/errors.hpp"

using namespace twoscale;

TEST_CASE("macro mesh is uniform with tagged ends") {
  const MacroMesh mesh = build_macro_mesh(10, 0.05);
  CHECK(mesh.node_count() == 11);
  CHECK(mesh.element_count() == 10);
  CHECK(mesh.nodes.front() == 0.0);
  CHECK(mesh.nodes.back() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(mesh.dirichlet_node == 0);
  CHECK(mesh.neumann_node == 10);
  for (int e = 0; e < mesh.element_count(); ++e) {
    CHECK(mesh.element_length(e) == doctest::Approx(0.005).epsilon(1e-12));
  }
}

TEST_CASE("macro mesh rejects bad input") {
  CHECK_THROWS_AS(build_macro_mesh(0, 1.0), ValidationError);
  CHECK_THROWS_AS(build_macro_mesh(4, 0.0), ValidationError);
  CHECK_THROWS_AS(build_macro_mesh(4, -1.0), ValidationError);
}

TEST_CASE("unit cell boundary parts add up to the perimeter") {
  const MicroMesh mesh = build_micro_mesh(3, 5);
  const double g1 = boundary_measure(mesh, BoundaryTag::Gamma1);
  const double g2 = boundary_measure(mesh, BoundaryTag::Gamma2);
  const double outer = boundary_measure(mesh, BoundaryTag::Outer);
  CHECK(g1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(outer == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g1 + g2 + outer == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("scaled cell walls carry the right measure") {
  const MicroMesh mesh = build_micro_mesh(4, 4, 2.0, 0.5);
  CHECK(boundary_measure(mesh, BoundaryTag::Gamma1) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(boundary_measure(mesh, BoundaryTag::Gamma2) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(boundary_measure(mesh, BoundaryTag::Outer) ==
        doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("boundary measures are refinement invariant") {
  for (const int n : {1, 2, 4, 8, 16}) {
    const MicroMesh mesh = build_micro_mesh(n, n, 0.7, 1.3);
    CHECK(boundary_measure(mesh, BoundaryTag::Gamma1) ==
          doctest::Approx(1.3).epsilon(1e-12));
    CHECK(boundary_measure(mesh, BoundaryTag::Outer) ==
          doctest::Approx(1.4).epsilon(1e-12));
  }
}

TEST_CASE("triangulation covers the cell without gaps") {
  const MicroMesh mesh = build_micro_mesh(5, 3, 2.0, 0.5);
  CHECK(mesh.node_count() == 6 * 4);
  CHECK(mesh.triangle_count() == 2 * 5 * 3);
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double a = triangle_area(mesh, t);
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(mesh.area()).epsilon(1e-12));
}

TEST_CASE("structured triangles stay non-obtuse, even anisotropic ones") {
  CHECK(is_non_obtuse(build_micro_mesh(2, 2)));
  CHECK(is_non_obtuse(build_micro_mesh(8, 2)));
  CHECK(is_non_obtuse(build_micro_mesh(3, 11, 5.0, 0.25)));
}

TEST_CASE("micro mesh rejects bad input") {
  CHECK_THROWS_AS(build_micro_mesh(0, 3), ValidationError);
  CHECK_THROWS_AS(build_micro_mesh(3, 0), ValidationError);
  CHECK_THROWS_AS(build_micro_mesh(3, 3, -1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(build_micro_mesh(3, 3, 1.0, 0.0), ValidationError);
}

TEST_CASE("boundary edges carry consistent endpoints and tags") {
  const MicroMesh mesh = build_micro_mesh(4, 6);
  int n_g1 = 0, n_g2 = 0, n_outer = 0;
  for (const auto& e : mesh.boundary_edges) {
    const auto& pa = mesh.nodes[e.a];
    const auto& pb = mesh.nodes[e.b];
    switch (e.tag) {
      case BoundaryTag::Gamma1:
        ++n_g1;
        CHECK(pa[0] == 0.0);
        CHECK(pb[0] == 0.0);
        break;
      case BoundaryTag::Gamma2:
        ++n_g2;
        CHECK(pa[0] == doctest::Approx(1.0));
        CHECK(pb[0] == doctest::Approx(1.0));
        break;
      case BoundaryTag::Outer:
        ++n_outer;
        CHECK(pa[1] == pb[1]);
        break;
    }
    CHECK(e.length == doctest::Approx(std::hypot(pb[0] - pa[0], pb[1] - pa[1])));
  }
  CHECK(n_g1 == 6);
  CHECK(n_g2 == 6);
  CHECK(n_outer == 8);
}

TEST_CASE("mesh tables are deterministic") {
  const MicroMesh a = build_micro_mesh(3, 3);
  const MicroMesh b = build_micro_mesh(3, 3);
  std::ostringstream sa, sb;
  write_mesh_table(a, sa);
  write_mesh_table(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}
