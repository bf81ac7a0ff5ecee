#include "twoscale/exchange.hpp"

#include <cmath>
#include <vector>

#include "twoscale/errors.hpp"

namespace twoscale {

DirichletDatum DirichletDatum::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

DirichletDatum DirichletDatum::linear_ramp(double v0, double slope) {
  return {[v0, slope](double t) { return v0 + slope * t; },
          [slope](double) { return slope; }};
}

DirichletDatum DirichletDatum::exponential(double v0, double rate) {
  return {[v0, rate](double t) { return v0 * std::exp(rate * t); },
          [v0, rate](double t) { return v0 * rate * std::exp(rate * t); }};
}

namespace {

void append_block(std::vector<Eigen::Triplet<double>>& trip, const SparseOperator& op,
                  int row0, int col0, double scale, int skip_row = -1) {
  for (int c = 0; c < op.outerSize(); ++c) {
    for (SparseOperator::InnerIterator it(op, c); it; ++it) {
      if (it.row() == skip_row) {
        continue;
      }
      trip.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
    }
  }
}

}  // namespace

P3System::P3System(const OperatorSet& ops, const KineticsSpec& spec, double dt,
                   P3Options opt)
    : ops_(&ops), spec_(spec), dt_(dt), opt_(opt) {
  spec_.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("exchange step: dt must be positive");
  }
  if (!(opt_.exchange_scale >= 0.0) || !std::isfinite(opt_.exchange_scale)) {
    throw ValidationError("exchange step: exchange_scale must be nonnegative");
  }

  const int n_mi = ops.n_micro();
  const int n_ma = ops.n_macro();
  const int macro_off = n_ma * n_mi;
  const int dir = ops.macro.dirichlet_node;
  const double alpha = spec_.alpha;
  const double H = spec_.henry;
  const double scale = opt_.exchange_scale;
  const BoundaryOperator& g2 = ops.gamma2;

  cell_matrix_ = ops.micro_mass / dt + ops.micro_stiff_d2 + alpha * ops.gamma2_global;
  cell_matrix_.makeCompressed();

  if (!opt_.schur) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n_ma; ++i) {
      const double w = ops.macro_weights[i];
      append_block(trip, cell_matrix_, i * n_mi, i * n_mi, w);
      for (int k = 0; k < g2.size(); ++k) {
        trip.emplace_back(i * n_mi + g2.nodes[k], macro_off + i,
                          -alpha * H * w * g2.weights[k]);
      }
    }
    const SparseOperator macro_step = ops.macro_mass / dt + ops.macro_stiff;
    append_block(trip, macro_step, macro_off, macro_off, 1.0, dir);
    for (int j = 0; j < n_ma; ++j) {
      if (j == dir) {
        continue;
      }
      trip.emplace_back(macro_off + j, macro_off + j,
                        scale * alpha * H * g2.measure * ops.macro_weights[j]);
      for (int k = 0; k < g2.size(); ++k) {
        trip.emplace_back(macro_off + j, j * n_mi + g2.nodes[k],
                          -scale * alpha * ops.macro_weights[j] * g2.weights[k]);
      }
    }
    trip.emplace_back(macro_off + dir, macro_off + dir, 1.0);

    stacked_ = SparseOperator(macro_off + n_ma, macro_off + n_ma);
    stacked_.setFromTriplets(trip.begin(), trip.end());
    stacked_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<SparseOperator>>();
    lu_->compute(stacked_);
    if (lu_->info() != Eigen::Success) {
      throw SingularSystem("exchange step: stacked factorization failed");
    }
    return;
  }

  cell_solver_ = std::make_unique<Eigen::SimplicialLDLT<SparseOperator>>();
  cell_solver_->compute(cell_matrix_);
  if (cell_solver_->info() != Eigen::Success) {
    throw SingularSystem("exchange step: cell factorization failed");
  }
  Vector b = Vector::Zero(n_mi);
  for (int k = 0; k < g2.size(); ++k) {
    b[g2.nodes[k]] = g2.weights[k];
  }
  zvec_ = cell_solver_->solve(b);
  const double bz = b.dot(zvec_);

  std::vector<Eigen::Triplet<double>> trip;
  const SparseOperator macro_step = ops.macro_mass / dt + ops.macro_stiff;
  append_block(trip, macro_step, 0, 0, 1.0, dir);
  for (int j = 0; j < n_ma; ++j) {
    if (j == dir) {
      continue;
    }
    trip.emplace_back(j, j,
                      scale * alpha * H * ops.macro_weights[j] * (g2.measure - alpha * bz));
  }
  trip.emplace_back(dir, dir, 1.0);
  SparseOperator macro_mat(n_ma, n_ma);
  macro_mat.setFromTriplets(trip.begin(), trip.end());
  macro_mat.makeCompressed();
  macro_lu_ = std::make_unique<Eigen::SparseLU<SparseOperator>>();
  macro_lu_->compute(macro_mat);
  if (macro_lu_->info() != Eigen::Success) {
    throw SingularSystem("exchange step: macro factorization failed");
  }
}

Vector P3System::assemble_rhs_cells(const ExchangeState& prev,
                                    const std::vector<Vector>& g, const P3Sources* src,
                                    int cell, double) const {
  Vector rhs = ops_->micro_mass * (prev.w2[cell] / dt_ + g[cell]);
  if (src && src->gamma2) {
    const BoundaryOperator& g2 = ops_->gamma2;
    const Vector& s = (*src->gamma2)[cell];
    for (int k = 0; k < g2.size(); ++k) {
      rhs[g2.nodes[k]] += g2.weights[k] * s[k];
    }
  }
  return rhs;
}

ExchangeState P3System::step(const ExchangeState& prev, const std::vector<Vector>& g,
                             const DirichletDatum& w3D, const P3Sources* src) const {
  const OperatorSet& ops = *ops_;
  const int n_mi = ops.n_micro();
  const int n_ma = ops.n_macro();
  const int macro_off = n_ma * n_mi;
  const int dir = ops.macro.dirichlet_node;
  const double alpha = spec_.alpha;
  const double H = spec_.henry;
  const double scale = opt_.exchange_scale;
  const BoundaryOperator& g2 = ops.gamma2;

  if (static_cast<int>(prev.w2.size()) != n_ma || prev.w3.size() != n_ma ||
      static_cast<int>(g.size()) != n_ma) {
    throw ValidationError("exchange step: state size does not match the meshes");
  }
  for (int i = 0; i < n_ma; ++i) {
    if (prev.w2[i].size() != n_mi || g[i].size() != n_mi) {
      throw ValidationError("exchange step: cell field size does not match the mesh");
    }
  }
  if (!w3D.value) {
    throw ValidationError("exchange step: missing Dirichlet datum");
  }

  const double t_new = prev.t + dt_;
  Vector macro_rhs = ops.macro_mass * (prev.w3 / dt_);
  if (src && src->macro) {
    macro_rhs += ops.macro_mass * (*src->macro);
  }

  ExchangeState next;
  next.t = t_new;
  next.w2.resize(n_ma);
  next.w3.resize(n_ma);

  if (!opt_.schur) {
    Vector rhs(macro_off + n_ma);
    for (int i = 0; i < n_ma; ++i) {
      rhs.segment(i * n_mi, n_mi) =
          ops.macro_weights[i] * assemble_rhs_cells(prev, g, src, i, t_new);
    }
    rhs.segment(macro_off, n_ma) = macro_rhs;
    rhs[macro_off + dir] = w3D.value(t_new);

    const Vector sol = lu_->solve(rhs);
    if (lu_->info() != Eigen::Success) {
      throw SingularSystem("exchange step: stacked solve failed");
    }
    for (int i = 0; i < n_ma; ++i) {
      next.w2[i] = sol.segment(i * n_mi, n_mi);
    }
    next.w3 = sol.segment(macro_off, n_ma);
    next.w3[dir] = w3D.value(t_new);
    return next;
  }

  std::vector<Vector> y(n_ma);
  Vector rhs3 = macro_rhs;
  for (int i = 0; i < n_ma; ++i) {
    y[i] = cell_solver_->solve(assemble_rhs_cells(prev, g, src, i, t_new));
    if (i != dir) {
      double by = 0.0;
      for (int k = 0; k < g2.size(); ++k) {
        by += g2.weights[k] * y[i][g2.nodes[k]];
      }
      rhs3[i] += scale * alpha * ops.macro_weights[i] * by;
    }
  }
  rhs3[dir] = w3D.value(t_new);
  next.w3 = macro_lu_->solve(rhs3);
  if (macro_lu_->info() != Eigen::Success) {
    throw SingularSystem("exchange step: macro solve failed");
  }
  next.w3[dir] = w3D.value(t_new);
  for (int i = 0; i < n_ma; ++i) {
    next.w2[i] = y[i] + alpha * H * next.w3[i] * zvec_;
  }
  return next;
}

ExchangeState p3_step(const ExchangeState& prev, const std::vector<Vector>& g,
                      const DirichletDatum& w3D, double dt, const OperatorSet& ops,
                      const KineticsSpec& spec, const P3Options& opt,
                      const P3Sources* src) {
  return P3System(ops, spec, dt, opt).step(prev, g, w3D, src);
}

Vector exchange_flux(const ExchangeState& state, const OperatorSet& ops,
                     const KineticsSpec& spec, double scale) {
  const int n_ma = ops.n_macro();
  const BoundaryOperator& g2 = ops.gamma2;
  Vector flux(n_ma);
  for (int j = 0; j < n_ma; ++j) {
    double bw2 = 0.0;
    for (int k = 0; k < g2.size(); ++k) {
      bw2 += g2.weights[k] * state.w2[j][g2.nodes[k]];
    }
    flux[j] = -scale * spec.alpha * (spec.henry * state.w3[j] * g2.measure - bw2);
  }
  return flux;
}

}  // namespace twoscale
