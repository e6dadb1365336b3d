#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/sinhc.hpp>

#include "polarfermi/error.hpp"
#include "polarfermi/quadrature.hpp"

namespace polarfermi {

// Thermodynamic point in units hbar = 2m = k_B = 1. `coupling` is lambda for
// radial potentials and g for the 1-D contact model.
struct PhysParams {
  double mu_bar = 1.0;
  double delta_mu = 0.0;
  double T = 0.0;
  double coupling = 1.0;

  void validate() const {
    if (!(delta_mu >= 0.0)) throw std::invalid_argument("delta_mu must be >= 0");
    if (!(T >= 0.0)) throw std::invalid_argument("T must be >= 0");
    if (!(coupling > 0.0)) throw std::invalid_argument("coupling must be > 0");
    if (!std::isfinite(mu_bar) || !std::isfinite(delta_mu) || !std::isfinite(T) ||
        !std::isfinite(coupling))
      throw std::invalid_argument("parameters must be finite");
  }

  double c() const {
    validate();
    if (!(T > 0.0)) throw std::invalid_argument("delta_mu/T needs T > 0");
    return delta_mu / T;
  }

  std::string describe() const {
    return "mu_bar=" + fmt(mu_bar) + " delta_mu=" + fmt(delta_mu) + " T=" + fmt(T) +
           " coupling=" + fmt(coupling);
  }
};

struct KernelPoint {
  double t;
  double E;
  double value;
};

enum class Kind { i, o, g };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::i: return "i";
    case Kind::o: return "o";
    case Kind::g: return "g";
  }
  return "?";
}

inline Kind kind_from_string(const std::string& s) {
  if (s == "i") return Kind::i;
  if (s == "o") return Kind::o;
  if (s == "g") return Kind::g;
  throw std::invalid_argument("unknown curve kind '" + s + "'");
}

// ln(2 + sqrt 3): above this c the kernel is no longer monotone in Delta.
inline const double kMonotoneThreshold = std::log(2.0 + std::sqrt(3.0));

// Logistic 1/(1+e^u) without overflow.
inline double fermi(double u) {
  if (u > 0.0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

// sinh x / (cosh x + cosh c), evaluated with a common exponential scale.
inline double upsilon(double x, double c) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.0;
  const double ac = std::abs(c);
  const double m = std::max(ax, ac);
  const double num = std::exp(ax - m) * -std::expm1(-2.0 * ax);
  const double den = std::exp(ax - m) + std::exp(-ax - m) + std::exp(ac - m) + std::exp(-ac - m);
  return std::copysign(num / den, x);
}

// 1 - upsilon(x, c) for x >= 0, free of cancellation when upsilon is close to 1.
inline double one_minus_upsilon(double x, double c) {
  return fermi(x + c) + fermi(x - c);
}

// upsilon(x, c) / x, finite at x = 0 where it equals 1/(1 + cosh c).
inline double upsilon_over_x(double x, double c) {
  const double ax = std::abs(x);
  if (ax <= 1.0) return boost::math::sinhc_pi(ax) / (std::cosh(ax) + std::cosh(c));
  return upsilon(ax, c) / ax;
}

inline double upsilon0(double t, const PhysParams& p) {
  return upsilon(t / p.T, p.c());
}

// x / (tanh((x+c)/2) + tanh((x-c)/2)) = x / (2 upsilon(x, c)).
inline double f_val(double x, double c) {
  if (x < 0.0 || c < 0.0) throw std::invalid_argument("f_val: need x >= 0 and c >= 0");
  return 0.5 / upsilon_over_x(x, c);
}

inline double b_of_c(double c) {
  if (c < 0.0) throw std::invalid_argument("b_of_c: need c >= 0");
  if (c <= kMonotoneThreshold) return 0.0;
  const double hi = std::max(10.0, 4.0 * c);
  const auto m = quad::minimize([c](double x) { return f_val(x, c); }, 0.0, hi, 45);
  if (m.value >= f_val(0.0, c) * (1.0 - 1e-12)) return 0.0;
  return m.x;
}

// 1 / K^Delta(t); the integrals of the library use the reciprocal directly.
inline double inv_K_delta(double t, double Delta, const PhysParams& p) {
  if (Delta < 0.0) throw std::invalid_argument("K_delta: Delta must be >= 0");
  const double E = std::hypot(t, Delta);
  if (p.T == 0.0) {
    p.validate();
    if (p.delta_mu > 0.0) throw std::invalid_argument("K_delta: T = 0 with delta_mu > 0");
    return 1.0 / E;
  }
  return upsilon_over_x(E / p.T, p.c()) / p.T;
}

inline double K_delta(double t, double Delta, const PhysParams& p) {
  if (Delta < 0.0) throw std::invalid_argument("K_delta: Delta must be >= 0");
  const double E = std::hypot(t, Delta);
  if (p.T == 0.0) {
    p.validate();
    if (p.delta_mu > 0.0) throw std::invalid_argument("K_delta: T = 0 with delta_mu > 0");
    return E;
  }
  return 2.0 * p.T * f_val(E / p.T, p.c());
}

inline KernelPoint kernel_point(double t, double Delta, const PhysParams& p) {
  return {t, std::hypot(t, Delta), K_delta(t, Delta, p)};
}

inline double K_tilde(double t, const PhysParams& p) {
  const double c = p.c();
  const double b = b_of_c(c);
  const double x = std::abs(t) / p.T;
  return 2.0 * p.T * f_val(x >= b ? x : b, c);
}

}  // namespace polarfermi
