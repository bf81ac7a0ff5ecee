#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <vector>

#include "twoscale/geometry.hpp"
#include "twoscale/kinetics.hpp"

namespace twoscale {

using SparseOperator = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Global ids of the nodes on a boundary part, ordered along the wall
/// (ascending y on the side walls; bottom wall then top wall, ascending x,
/// for the insulated pair).
std::vector<int> trace_indices(const MicroMesh& mesh, BoundaryTag tag);

/// Mass operator of one boundary part in trace-local numbering, together
/// with the map back to global micro nodes.
struct BoundaryOperator {
  BoundaryTag tag = BoundaryTag::Outer;
  std::vector<int> nodes;
  SparseOperator mass;  // n_trace x n_trace
  Vector weights;       // row sums of mass; the lumped quadrature weights
  double measure = 0.0;

  int size() const { return static_cast<int>(nodes.size()); }
  double total_mass() const { return weights.sum(); }

  Vector gather(const Vector& micro_field) const;
  void scatter_add(const Vector& trace_values, Vector& micro_field) const;
  /// Embeds `mass` into an n x n operator on global micro indices.
  SparseOperator global_mass(int n) const;
  Vector global_weights(int n) const;
};

SparseOperator assemble_stiffness(const MacroMesh& mesh, const std::vector<double>& d,
                                  double floor);
SparseOperator assemble_mass(const MacroMesh& mesh, bool lumped);
SparseOperator assemble_stiffness(const MicroMesh& mesh, const std::vector<double>& d,
                                  double floor);
SparseOperator assemble_mass(const MicroMesh& mesh, bool lumped);
BoundaryOperator assemble_boundary_mass(const MicroMesh& mesh, BoundaryTag tag,
                                        bool lumped);

/// Row sums of a mass operator.
Vector lumped_weights(const SparseOperator& mass);

/// Deterministic "row col value" dump for regression comparisons.
void dump_operator(const SparseOperator& op, std::ostream& out);

/// Every assembled operator the coupled solvers need, built once per run.
/// The micro operators are shared by all macro nodes since the cell geometry
/// does not vary.  `macro_weights` are always the lumped macro masses: the
/// two-scale quadrature uses them regardless of the mass-lumping flag.
struct OperatorSet {
  MacroMesh macro;
  MicroMesh micro;
  bool lumped = true;

  SparseOperator micro_mass;
  Vector micro_lumped;
  SparseOperator micro_stiff_d1;
  SparseOperator micro_stiff_d2;
  SparseOperator macro_mass;
  SparseOperator macro_stiff;
  Vector macro_weights;

  BoundaryOperator gamma1;
  BoundaryOperator gamma2;
  SparseOperator gamma1_global;  // n_micro x n_micro
  SparseOperator gamma2_global;
  Vector gamma2_weights_global;

  int n_micro() const { return micro.node_count(); }
  int n_macro() const { return macro.node_count(); }
};

OperatorSet build_operator_set(const MacroMesh& macro, const MicroMesh& micro,
                               const DiffusivityField& diff, bool lumped);

}  // namespace twoscale
