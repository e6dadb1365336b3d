#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "polarfermi/core.hpp"
#include "polarfermi/quadrature.hpp"

namespace polarfermi {

struct KappaValue {
  double t = 0.0;
  Kind kind = Kind::i;
  double value = 0.0;
  double minimizer_d = 0.0;
};

namespace detail {

inline double one_minus_exp_over_x(double x) {
  return x == 0.0 ? 1.0 : -std::expm1(-x) / x;
}

inline double kappa_cutoff(double t, double d = 0.0) {
  return std::max({60.0, d + 60.0, t + 60.0});
}

// F(t) int_lo^X g(x) F(x+t) dx + F(-t) int_lo^X g(x) F(x-t) dx with g(x) = (1-e^{-x})/x.
inline double weighted_tails(double t, double lo, const QuadOptions& opt) {
  const double X = kappa_cutoff(t);
  auto pts = quad::clustered_points(lo, X, t, 0.5);
  for (double x = 1.0; x < X; x *= 2.0)
    if (x > lo) pts.push_back(x);
  auto plus = [t](double x) { return one_minus_exp_over_x(x) * fermi(x + t); };
  auto minus = [t](double x) { return one_minus_exp_over_x(x) * fermi(x - t); };
  return fermi(t) * quad::integrate_pieces(plus, pts, opt) +
         fermi(-t) * quad::integrate_pieces(minus, pts, opt);
}

}  // namespace detail

// int_0^b ln(x) e^{-x} dx, through x = e^s.
inline double log_exp_integral(double b, const QuadOptions& opt = {}) {
  if (b < 0.0) throw std::invalid_argument("log_exp_integral: need b >= 0");
  if (b == 0.0) return 0.0;
  const double top = std::log(b);
  auto g = [](double s) { return s * std::exp(s - std::exp(s)); };
  std::vector<double> pts;
  for (double s = top - 50.0; s < top; s += 2.0) pts.push_back(s);
  pts.push_back(top);
  return quad::integrate_pieces(g, pts, opt);
}

inline double kappa_i(double t, const QuadOptions& opt = {}) {
  if (!(t >= 0.0)) throw std::invalid_argument("kappa_i: need t >= 0");
  return detail::weighted_tails(t, 0.0, opt) - std::log(std::numbers::pi / 2.0);
}

inline double kappa_o(double c, const QuadOptions& opt = {}) {
  if (!(c >= 0.0)) throw std::invalid_argument("kappa_o: need c >= 0");
  const double b = b_of_c(c);
  if (b == 0.0) return kappa_i(c, opt);
  return detail::weighted_tails(c, b, opt) - std::expm1(-b) * std::log(b) -
         log_exp_integral(b, opt) - b / (2.0 * f_val(b, c)) - std::log(std::numbers::pi / 2.0);
}

inline double zeta(double t, double d, const QuadOptions& opt = {}) {
  if (!(t >= 0.0) || !(d >= 0.0)) throw std::invalid_argument("zeta: need t >= 0 and d >= 0");
  using std::numbers::pi;
  if (d < 1e-8) return detail::weighted_tails(t, 0.0, opt) + std::log(2.0) - std::log(pi);

  // -int_0^d e^{-x} ln(x/d) dx with x = d e^{-s}
  const double peak = std::max(0.0, std::log(d));
  auto first = [d](double s) { return d * s * std::exp(-s - d * std::exp(-s)); };
  auto first_pts = quad::clustered_points(0.0, peak + 60.0, peak, 0.5);
  const double term1 = quad::integrate_pieces(first, first_pts, opt);

  // the remaining integrals run over x in [d, X] with x = d cosh u
  const double X = detail::kappa_cutoff(t, d);
  const double U = std::acosh(X / d);
  std::vector<double> pts;
  for (double u = 0.0; u < U; u += 1.0) pts.push_back(u);
  pts.push_back(U);
  for (double x : quad::clustered_points(d, X, t, 0.5))
    if (x > d) pts.push_back(std::acosh(x / d));
  for (double x = 1.0; x < X; x *= 2.0)
    if (x > d) pts.push_back(std::acosh(x / d));

  auto second = [d](double u) {
    return std::exp(-d * std::cosh(u)) * std::log1p(std::tanh(u)) * d * std::sinh(u);
  };
  auto plus = [d, t](double u) {
    const double x = d * std::cosh(u);
    return -std::expm1(-x) * fermi(x + t);
  };
  auto minus = [d, t](double u) {
    const double x = d * std::cosh(u);
    return -std::expm1(-x) * fermi(x - t);
  };
  const double term2 = quad::integrate_pieces(second, pts, opt);
  const double term3 = fermi(t) * quad::integrate_pieces(plus, pts, opt);
  const double term4 = fermi(-t) * quad::integrate_pieces(minus, pts, opt);
  return term1 + term2 + term3 + term4 - std::log(pi);
}

inline KappaValue kappa_g(double t, const QuadOptions& opt = {}) {
  if (!(t >= 0.0)) throw std::invalid_argument("kappa_g: need t >= 0");
  const double boundary = zeta(t, 0.0, opt);
  constexpr int n = 60;
  std::vector<double> d(n), z(n);
  int best = 0;
  for (int k = 0; k < n; ++k) {
    d[k] = std::pow(10.0, -3.0 + 4.5 * k / (n - 1));
    z[k] = zeta(t, d[k], opt);
    if (z[k] < z[best]) best = k;
  }
  const double lo = d[std::max(best - 1, 0)];
  const double hi = d[std::min(best + 1, n - 1)];
  auto m = quad::minimize([&](double x) { return zeta(t, x, opt); }, lo, hi, 40);
  if (z[best] < m.value) m = {d[best], z[best]};
  if (m.value >= boundary) return {t, Kind::g, boundary, 0.0};
  return {t, Kind::g, m.value, m.x};
}

inline double kappa(Kind kind, double t, const QuadOptions& opt = {}) {
  switch (kind) {
    case Kind::i: return kappa_i(t, opt);
    case Kind::o: return kappa_o(t, opt);
    case Kind::g: return kappa_g(t, opt).value;
  }
  return kappa_i(t, opt);
}

}  // namespace polarfermi
