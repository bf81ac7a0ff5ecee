#include "twoscale/geometry.hpp"

#include <cmath>
#include <ostream>

#include "twoscale/errors.hpp"

namespace twoscale {

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Gamma1:
      return "gamma1";
    case BoundaryTag::Gamma2:
      return "gamma2";
    case BoundaryTag::Outer:
      return "outer";
  }
  return "?";
}

MacroMesh build_macro_mesh(int n_elements, double length) {
  if (n_elements < 1) {
    throw ValidationError("macro mesh needs at least one element");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ValidationError("macro mesh length must be positive and finite");
  }
  MacroMesh mesh;
  mesh.nodes.resize(n_elements + 1);
  for (int i = 0; i <= n_elements; ++i) {
    mesh.nodes[i] = length * static_cast<double>(i) / n_elements;
  }
  mesh.dirichlet_node = 0;
  mesh.neumann_node = n_elements;
  return mesh;
}

MicroMesh build_micro_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) {
    throw ValidationError("micro mesh needs at least one cell per direction");
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ValidationError("micro mesh extents must be positive and finite");
  }
  MicroMesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.lx = lx;
  mesh.ly = ly;

  mesh.nodes.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes[mesh.node_id(i, j)] = {lx * static_cast<double>(i) / nx,
                                        ly * static_cast<double>(j) / ny};
    }
  }

  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = mesh.node_id(i, j);
      const int v10 = mesh.node_id(i + 1, j);
      const int v01 = mesh.node_id(i, j + 1);
      const int v11 = mesh.node_id(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  auto edge = [&mesh](int a, int b, BoundaryTag tag) {
    MicroEdge e;
    e.a = a;
    e.b = b;
    e.tag = tag;
    const auto& pa = mesh.nodes[a];
    const auto& pb = mesh.nodes[b];
    e.length = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
    return e;
  };
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back(
        edge(mesh.node_id(0, j), mesh.node_id(0, j + 1), BoundaryTag::Gamma1));
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back(
        edge(mesh.node_id(nx, j), mesh.node_id(nx, j + 1), BoundaryTag::Gamma2));
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back(
        edge(mesh.node_id(i, 0), mesh.node_id(i + 1, 0), BoundaryTag::Outer));
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back(
        edge(mesh.node_id(i, ny), mesh.node_id(i + 1, ny), BoundaryTag::Outer));
  }
  return mesh;
}

double boundary_measure(const MicroMesh& mesh, BoundaryTag tag) {
  double total = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == tag) {
      total += e.length;
    }
  }
  return total;
}

double triangle_area(const MicroMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const auto& p0 = mesh.nodes[tri[0]];
  const auto& p1 = mesh.nodes[tri[1]];
  const auto& p2 = mesh.nodes[tri[2]];
  return 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                        (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

bool is_non_obtuse(const MicroMesh& mesh) {
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto& a = mesh.nodes[tri[k]];
      const auto& b = mesh.nodes[tri[(k + 1) % 3]];
      const auto& c = mesh.nodes[tri[(k + 2) % 3]];
      const double dot = (b[0] - a[0]) * (c[0] - a[0]) + (b[1] - a[1]) * (c[1] - a[1]);
      if (dot < -1e-12) {
        return false;
      }
    }
  }
  return true;
}

void write_mesh_table(const MacroMesh& mesh, std::ostream& out) {
  out << "macro nodes " << mesh.node_count() << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    out << i << " " << mesh.nodes[i] << "\n";
  }
}

void write_mesh_table(const MicroMesh& mesh, std::ostream& out) {
  out << "micro nodes " << mesh.node_count() << " triangles " << mesh.triangle_count()
      << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    out << i << " " << mesh.nodes[i][0] << " " << mesh.nodes[i][1] << "\n";
  }
  for (const auto& tri : mesh.triangles) {
    out << "t " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  for (const auto& e : mesh.boundary_edges) {
    out << "e " << e.a << " " << e.b << " " << to_string(e.tag) << "\n";
  }
}

}  // namespace twoscale
