#include "twoscale/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ValidationError(std::string(name) + " must be finite and nonnegative");
  }
}

}  // namespace

void KineticsSpec::validate() const {
  require_finite_nonneg(k_f1, "k_f1");
  require_finite_nonneg(k_f2, "k_f2");
  require_finite_nonneg(k_R, "k_R");
  require_finite_nonneg(k_Q, "k_Q");
  require_finite_nonneg(beta_max, "beta_max");
  require_finite_nonneg(alpha, "alpha");
  if (!std::isfinite(henry) || henry <= 0.0) {
    throw ValidationError("henry must be finite and positive");
  }
  if (!std::isfinite(p_R) || p_R < 1.0) {
    throw ValidationError("p_R must be finite and at least 1");
  }
  if (m && (!std::isfinite(*m) || *m < 0.0)) {
    throw ValidationError("truncation level must be finite and nonnegative");
  }
}

double eval_f(const KineticsSpec& spec, int which, double r) {
  const double k = which == 1 ? spec.k_f1 : spec.k_f2;
  if (spec.m) {
    r = std::min(r, *spec.m);
  }
  return k * std::max(r, 0.0);
}

double eval_R(const KineticsSpec& spec, double r) {
  if (spec.m) {
    r = std::min(r, *spec.m);
  }
  return spec.k_R * std::pow(std::max(r, 0.0), spec.p_R);
}

double eval_R_slope(const KineticsSpec& spec, double r) {
  if (spec.m && r > *spec.m) {
    return 0.0;
  }
  if (r < 0.0) {
    return 0.0;
  }
  if (spec.p_R == 1.0) {
    return spec.k_R;
  }
  return spec.k_R * spec.p_R * std::pow(r, spec.p_R - 1.0);
}

double eval_Q(const KineticsSpec& spec, double b) {
  if (spec.m) {
    b = std::clamp(b, -*spec.m, *spec.m);
  }
  return spec.k_Q * std::max(spec.beta_max - b, 0.0);
}

double eval_eta(const KineticsSpec& spec, double w1, double w4) {
  return eval_R(spec, w1) * eval_Q(spec, w4);
}

double eval_R_primitive(const KineticsSpec& spec, double r) {
  const double p = spec.p_R;
  auto plain = [&](double s) {
    s = std::max(s, 0.0);
    return spec.k_R * std::pow(s, p + 1.0) / (p + 1.0);
  };
  if (!spec.m || r <= *spec.m) {
    return plain(r);
  }
  // Linear continuation with the frozen slope R(m) above the truncation level.
  return plain(*spec.m) + eval_R(spec, *spec.m) * (r - *spec.m);
}

namespace {

double value_at(const std::vector<double>& d, int element, const char* name) {
  if (d.size() == 1) {
    return d[0];
  }
  if (element < 0 || static_cast<std::size_t>(element) >= d.size()) {
    throw ValidationError(std::string(name) + " element index out of range");
  }
  return d[static_cast<std::size_t>(element)];
}

void validate_slice(const std::vector<double>& d, double floor, int elements,
                    const char* name) {
  if (!(floor > 0.0) || !std::isfinite(floor)) {
    throw EllipticityViolation(std::string(name) + " floor must be positive");
  }
  if (d.size() != 1 && d.size() != static_cast<std::size_t>(elements)) {
    throw ValidationError(std::string(name) + " has " + std::to_string(d.size()) +
                          " values, expected 1 or " + std::to_string(elements));
  }
  for (double v : d) {
    if (!std::isfinite(v) || v < floor) {
      throw EllipticityViolation(std::string(name) +
                                 " value below its ellipticity floor");
    }
  }
}

}  // namespace

double DiffusivityField::d1_at(int element) const { return value_at(d1, element, "d1"); }
double DiffusivityField::d2_at(int element) const { return value_at(d2, element, "d2"); }
double DiffusivityField::d3_at(int element) const { return value_at(d3, element, "d3"); }

void DiffusivityField::validate(int micro_elements, int macro_elements) const {
  validate_slice(d1, floor1, micro_elements, "d1");
  validate_slice(d2, floor2, micro_elements, "d2");
  validate_slice(d3, floor3, macro_elements, "d3");
}

BoundsEnvelope compute_bounds_envelope(const KineticsSpec& spec, double sup_w10,
                                       double sup_w20, double sup_w30,
                                       double sup_w3D, double sup_w40) {
  spec.validate();
  require_finite_nonneg(sup_w10, "sup_w10");
  require_finite_nonneg(sup_w20, "sup_w20");
  require_finite_nonneg(sup_w30, "sup_w30");
  require_finite_nonneg(sup_w3D, "sup_w3D");
  require_finite_nonneg(sup_w40, "sup_w40");

  const double H = spec.henry;
  const double m2_floor = std::max({sup_w20, H * sup_w30, H * sup_w3D});

  BoundsEnvelope env;
  if (spec.k_f1 == 0.0 && spec.k_f2 == 0.0) {
    // Volume exchange disabled: nothing couples M1 and M2.
    env.M1 = sup_w10;
    env.M2 = m2_floor;
  } else if (spec.k_f1 == 0.0 || spec.k_f2 == 0.0) {
    throw DegenerateKinetics(
        "volume rates have different ranges: exactly one of k_f1, k_f2 is zero");
  } else {
    env.M1 = std::max(sup_w10, (spec.k_f2 / spec.k_f1) * m2_floor);
    env.M2 = (spec.k_f1 / spec.k_f2) * env.M1;
  }
  env.M3 = env.M2 / H;
  env.M4 = std::max(spec.beta_max, sup_w40);
  env.M0 = std::max({env.M1, env.M2, env.M3, env.M4});
  return env;
}

}  // namespace twoscale
