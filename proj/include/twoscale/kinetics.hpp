#pragma once

#include <optional>
#include <vector>

namespace twoscale {

/// Constitutive constants of the reaction network.
///
/// Volume rates:   f1(r) = k_f1 * max(r, 0),  f2(r) = k_f2 * max(r, 0).
/// Surface rates:  R(r)  = k_R * max(r, 0)^p_R,
///                 Q(b)  = k_Q * max(beta_max - b, 0),
///                 eta(r, b) = R(r) * Q(b).
///
/// When the truncation level m is set, f and R are frozen at their value at m
/// for arguments above m, and Q is frozen outside [-m, m].  Solutions that
/// stay inside the invariant envelope never see the frozen branches.
struct KineticsSpec {
  double k_f1 = 1.0;
  double k_f2 = 1.0;
  double k_R = 1.0;
  double k_Q = 1.0;
  double beta_max = 1.0;
  double henry = 1.0;
  double alpha = 1.0;
  double p_R = 1.0;
  std::optional<double> m;

  /// Throws ValidationError on negative rates, henry <= 0, p_R < 1,
  /// beta_max < 0, or a negative truncation level.
  void validate() const;
};

/// which is 1 or 2.
double eval_f(const KineticsSpec& spec, int which, double r);
double eval_R(const KineticsSpec& spec, double r);
/// One-sided slope of R used by the Newton linearization (right derivative at
/// kinks, zero on frozen branches).
double eval_R_slope(const KineticsSpec& spec, double r);
double eval_Q(const KineticsSpec& spec, double b);
double eval_eta(const KineticsSpec& spec, double w1, double w4);
/// Primitive of the (possibly truncated) R with value 0 at 0; convex, which
/// is what the step-inequality check relies on.
double eval_R_primitive(const KineticsSpec& spec, double r);

/// Piecewise-constant diffusivities.  A vector of size 1 means a uniform
/// value; otherwise one value per element of the respective mesh (d1, d2 on
/// the cell triangulation, d3 on the macro grid).  Floors are the declared
/// ellipticity constants; validation rejects any value at or below its floor.
struct DiffusivityField {
  std::vector<double> d1{0.1};
  std::vector<double> d2{0.1};
  std::vector<double> d3{0.1};
  double floor1 = 1e-12;
  double floor2 = 1e-12;
  double floor3 = 1e-12;

  double d1_at(int element) const;
  double d2_at(int element) const;
  double d3_at(int element) const;

  /// Throws EllipticityViolation / ValidationError on bad values or sizes
  /// that match neither 1 nor the given element counts.
  void validate(int micro_elements, int macro_elements) const;
};

/// Componentwise ceilings preserved by the evolution; M0 is their maximum and
/// the default truncation level.
struct BoundsEnvelope {
  double M1 = 0.0;
  double M2 = 0.0;
  double M3 = 0.0;
  double M4 = 0.0;
  double M0 = 0.0;
};

/// Smallest envelope dominating the given data ceilings and balancing the
/// volume rates, i.e. f1(M1) == f2(M2), M3 = M2 / H, M4 covers beta_max.
/// Both volume rates identically zero is allowed (no balancing needed);
/// exactly one zero throws DegenerateKinetics.
BoundsEnvelope compute_bounds_envelope(const KineticsSpec& spec, double sup_w10,
                                       double sup_w20, double sup_w30,
                                       double sup_w3D, double sup_w40);

}  // namespace twoscale
