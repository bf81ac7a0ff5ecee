#pragma once

#include <array>
#include <iosfwd>
#include <vector>

namespace twoscale {

/// Boundary parts of the cell geometry.  Gamma1 is the reactive wall (x = 0),
/// Gamma2 the transmission wall (x = lx), Outer the two insulated walls.
enum class BoundaryTag { Gamma1, Gamma2, Outer };

const char* to_string(BoundaryTag tag);

/// Uniform 1D grid on [0, length].  Node 0 carries the Dirichlet condition,
/// the last node the natural one.  Immutable after construction.
struct MacroMesh {
  std::vector<double> nodes;
  int dirichlet_node = 0;
  int neumann_node = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return node_count() - 1; }
  double element_length(int e) const { return nodes[e + 1] - nodes[e]; }
  double length() const { return nodes.back() - nodes.front(); }
};

struct MicroEdge {
  int a = 0;  // endpoint node ids, ascending along the wall
  int b = 0;
  BoundaryTag tag = BoundaryTag::Outer;
  double length = 0.0;
};

/// Structured right-triangle grid on [0, lx] x [0, ly] with nx * ny cells,
/// each split along the lower-left to upper-right diagonal.  Every triangle
/// is right-angled, so stiffness off-diagonals are non-positive and the
/// discrete comparison arguments downstream stay valid.  Immutable after
/// construction.
struct MicroMesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<MicroEdge> boundary_edges;
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  double area() const { return lx * ly; }
};

/// Throws ValidationError unless n_elements >= 1 and length > 0.
MacroMesh build_macro_mesh(int n_elements, double length);

/// Throws ValidationError unless nx, ny >= 1 and lx, ly > 0.
MicroMesh build_micro_mesh(int nx, int ny, double lx = 1.0, double ly = 1.0);

/// Total length of the boundary part carrying `tag`.
double boundary_measure(const MicroMesh& mesh, BoundaryTag tag);

double triangle_area(const MicroMesh& mesh, int t);

/// True when no triangle has an angle beyond 90 degrees (tolerance 1e-12).
bool is_non_obtuse(const MicroMesh& mesh);

/// Plain-text dumps used by the CLI debug paths and golden-file tests.
void write_mesh_table(const MacroMesh& mesh, std::ostream& out);
void write_mesh_table(const MicroMesh& mesh, std::ostream& out);

}  // namespace twoscale
