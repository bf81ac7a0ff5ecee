#include "twoscale/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

using Triplet = Eigen::Triplet<double>;

double slice_value(const std::vector<double>& d, int element) {
  return d.size() == 1 ? d[0] : d[static_cast<std::size_t>(element)];
}

void check_slice(const std::vector<double>& d, double floor, int elements,
                 const char* where) {
  if (d.empty() || (d.size() != 1 && d.size() != static_cast<std::size_t>(elements))) {
    throw ValidationError(std::string(where) + ": diffusivity size mismatch");
  }
  for (double v : d) {
    if (!std::isfinite(v) || v < floor || v <= 0.0) {
      throw EllipticityViolation(std::string(where) +
                                 ": diffusivity below its ellipticity floor");
    }
  }
}

}  // namespace

SparseOperator assemble_stiffness(const MacroMesh& mesh, const std::vector<double>& d,
                                  double floor) {
  check_slice(d, floor, mesh.element_count(), "macro stiffness");
  std::vector<Triplet> trip;
  trip.reserve(4 * mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double w = slice_value(d, e) / mesh.element_length(e);
    trip.emplace_back(e, e, w);
    trip.emplace_back(e, e + 1, -w);
    trip.emplace_back(e + 1, e, -w);
    trip.emplace_back(e + 1, e + 1, w);
  }
  SparseOperator op(mesh.node_count(), mesh.node_count());
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return op;
}

SparseOperator assemble_mass(const MacroMesh& mesh, bool lumped) {
  std::vector<Triplet> trip;
  trip.reserve(4 * mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.element_length(e);
    if (lumped) {
      trip.emplace_back(e, e, 0.5 * h);
      trip.emplace_back(e + 1, e + 1, 0.5 * h);
    } else {
      trip.emplace_back(e, e, h / 3.0);
      trip.emplace_back(e, e + 1, h / 6.0);
      trip.emplace_back(e + 1, e, h / 6.0);
      trip.emplace_back(e + 1, e + 1, h / 3.0);
    }
  }
  SparseOperator op(mesh.node_count(), mesh.node_count());
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return op;
}

SparseOperator assemble_stiffness(const MicroMesh& mesh, const std::vector<double>& d,
                                  double floor) {
  check_slice(d, floor, mesh.triangle_count(), "micro stiffness");
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.nodes[tri[0]];
    const auto& p1 = mesh.nodes[tri[1]];
    const auto& p2 = mesh.nodes[tri[2]];
    // Hat-gradient components: grad(lambda_i) = (b_i, c_i) / (2 A).
    const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
    const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
    const double area = triangle_area(mesh, t);
    const double scale = slice_value(d, t) / (4.0 * area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(tri[i], tri[j], scale * (b[i] * b[j] + c[i] * c[j]));
      }
    }
  }
  SparseOperator op(mesh.node_count(), mesh.node_count());
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return op;
}

SparseOperator assemble_mass(const MicroMesh& mesh, bool lumped) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = triangle_area(mesh, t);
    if (lumped) {
      for (int i = 0; i < 3; ++i) {
        trip.emplace_back(tri[i], tri[i], area / 3.0);
      }
    } else {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          trip.emplace_back(tri[i], tri[j], area * (i == j ? 2.0 : 1.0) / 12.0);
        }
      }
    }
  }
  SparseOperator op(mesh.node_count(), mesh.node_count());
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return op;
}

std::vector<int> trace_indices(const MicroMesh& mesh, BoundaryTag tag) {
  std::vector<int> ids;
  switch (tag) {
    case BoundaryTag::Gamma1:
      for (int j = 0; j <= mesh.ny; ++j) {
        ids.push_back(mesh.node_id(0, j));
      }
      break;
    case BoundaryTag::Gamma2:
      for (int j = 0; j <= mesh.ny; ++j) {
        ids.push_back(mesh.node_id(mesh.nx, j));
      }
      break;
    case BoundaryTag::Outer:
      for (int i = 0; i <= mesh.nx; ++i) {
        ids.push_back(mesh.node_id(i, 0));
      }
      for (int i = 0; i <= mesh.nx; ++i) {
        ids.push_back(mesh.node_id(i, mesh.ny));
      }
      break;
  }
  return ids;
}

BoundaryOperator assemble_boundary_mass(const MicroMesh& mesh, BoundaryTag tag,
                                        bool lumped) {
  BoundaryOperator op;
  op.tag = tag;
  op.nodes = trace_indices(mesh, tag);

  std::vector<int> local(mesh.node_count(), -1);
  for (int k = 0; k < op.size(); ++k) {
    local[op.nodes[k]] = k;
  }

  std::vector<Triplet> trip;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) {
      continue;
    }
    const int a = local[e.a];
    const int b = local[e.b];
    op.measure += e.length;
    if (lumped) {
      trip.emplace_back(a, a, 0.5 * e.length);
      trip.emplace_back(b, b, 0.5 * e.length);
    } else {
      trip.emplace_back(a, a, e.length / 3.0);
      trip.emplace_back(a, b, e.length / 6.0);
      trip.emplace_back(b, a, e.length / 6.0);
      trip.emplace_back(b, b, e.length / 3.0);
    }
  }
  op.mass = SparseOperator(op.size(), op.size());
  op.mass.setFromTriplets(trip.begin(), trip.end());
  op.mass.makeCompressed();
  op.weights = lumped_weights(op.mass);
  return op;
}

Vector BoundaryOperator::gather(const Vector& micro_field) const {
  Vector out(size());
  for (int k = 0; k < size(); ++k) {
    out[k] = micro_field[nodes[k]];
  }
  return out;
}

void BoundaryOperator::scatter_add(const Vector& trace_values, Vector& micro_field) const {
  for (int k = 0; k < size(); ++k) {
    micro_field[nodes[k]] += trace_values[k];
  }
}

SparseOperator BoundaryOperator::global_mass(int n) const {
  std::vector<Triplet> trip;
  for (int k = 0; k < mass.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(mass, k); it; ++it) {
      trip.emplace_back(nodes[it.row()], nodes[it.col()], it.value());
    }
  }
  SparseOperator op(n, n);
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return op;
}

Vector BoundaryOperator::global_weights(int n) const {
  Vector out = Vector::Zero(n);
  for (int k = 0; k < size(); ++k) {
    out[nodes[k]] = weights[k];
  }
  return out;
}

Vector lumped_weights(const SparseOperator& mass) {
  Vector out = Vector::Zero(mass.rows());
  for (int k = 0; k < mass.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(mass, k); it; ++it) {
      out[it.row()] += it.value();
    }
  }
  return out;
}

void dump_operator(const SparseOperator& op, std::ostream& out) {
  char buf[64];
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(op, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << it.row() << " " << it.col() << " " << buf << "\n";
    }
  }
}

OperatorSet build_operator_set(const MacroMesh& macro, const MicroMesh& micro,
                               const DiffusivityField& diff, bool lumped) {
  diff.validate(micro.triangle_count(), macro.element_count());

  OperatorSet ops;
  ops.macro = macro;
  ops.micro = micro;
  ops.lumped = lumped;

  ops.micro_mass = assemble_mass(micro, lumped);
  ops.micro_lumped = lumped_weights(assemble_mass(micro, true));
  ops.micro_stiff_d1 = assemble_stiffness(micro, diff.d1, diff.floor1);
  ops.micro_stiff_d2 = assemble_stiffness(micro, diff.d2, diff.floor2);
  ops.macro_mass = assemble_mass(macro, lumped);
  ops.macro_stiff = assemble_stiffness(macro, diff.d3, diff.floor3);
  ops.macro_weights = lumped_weights(assemble_mass(macro, true));

  ops.gamma1 = assemble_boundary_mass(micro, BoundaryTag::Gamma1, lumped);
  ops.gamma2 = assemble_boundary_mass(micro, BoundaryTag::Gamma2, lumped);
  ops.gamma1_global = ops.gamma1.global_mass(micro.node_count());
  ops.gamma2_global = ops.gamma2.global_mass(micro.node_count());
  ops.gamma2_weights_global = ops.gamma2.global_weights(micro.node_count());
  return ops;
}

}  // namespace twoscale
