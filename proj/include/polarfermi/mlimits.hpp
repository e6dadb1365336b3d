#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "polarfermi/core.hpp"
#include "polarfermi/kappa.hpp"
#include "polarfermi/quadrature.hpp"

namespace polarfermi {

enum class MKind { plain, tilde, bar };

inline const char* to_string(MKind k) {
  switch (k) {
    case MKind::plain: return "plain";
    case MKind::tilde: return "tilde";
    case MKind::bar: return "bar";
  }
  return "?";
}

// The kappa function whose asymptote each integral approaches.
inline Kind asymptotic_kind(MKind k) {
  switch (k) {
    case MKind::plain: return Kind::i;
    case MKind::tilde: return Kind::o;
    case MKind::bar: return Kind::g;
  }
  return Kind::i;
}

struct MResult {
  MKind kind = MKind::plain;
  double value = 0.0;
  double y_star = 0.0;
};

namespace detail {

inline void check_m_params(const PhysParams& p) {
  p.validate();
  if (!(p.mu_bar > 0.0)) throw std::invalid_argument("m integrals need mu_bar > 0");
  if (!(p.T > 0.0)) throw std::invalid_argument("m integrals need T > 0");
}

inline std::vector<double> geometric_points(double lo, double hi, double first, double ratio = 3.0) {
  std::vector<double> pts{lo};
  for (double v = first; v < hi; v *= ratio)
    if (v > lo) pts.push_back(v);
  pts.push_back(hi);
  return pts;
}

}  // namespace detail

// (1/4 pi mu) int (1/K^0 - 1/p^2) d^3p, reduced to one-dimensional integrals in t = p^2 - mu.
inline MResult m_numeric(const PhysParams& p, const QuadOptions& opt = {}) {
  detail::check_m_params(p);
  const double mu = p.mu_bar, T = p.T, dm = p.delta_mu, c = p.c();
  const double rmu = std::sqrt(mu);

  // above the Fermi level: closed-form part minus the Fermi-tail correction
  auto above = [&](double t) {
    return (fermi((t + dm) / T) + fermi((t - dm) / T)) * std::sqrt(mu + t) / t;
  };
  const double top = std::max(mu, dm) + 80.0 * T;
  auto above_pts = quad::clustered_points(mu, top, dm, T);
  const double J1 = 2.0 * rmu * std::log1p(std::sqrt(2.0)) - quad::integrate_pieces(above, above_pts, opt);

  // below: symmetric combination of t and -t, regular at both ends
  auto below = [&](double t) {
    return upsilon(t / T, c) * (1.0 / (std::sqrt(mu + t) + rmu) - 1.0 / (std::sqrt(mu - t) + rmu));
  };
  const double half = 0.5 * mu;
  auto below_pts = detail::geometric_points(0.0, half, 0.01 * T * (1.0 + c));
  for (double x : quad::clustered_points(0.0, half, dm, T)) below_pts.push_back(x);
  double J2 = quad::integrate_pieces(below, below_pts, opt);
  // t = mu - u^2 removes the square-root endpoint at t = mu
  auto below_end = [&](double u) { return 2.0 * u * below(mu - u * u); };
  auto end_pts = quad::clustered_points(0.0, std::sqrt(half), dm < mu ? std::sqrt(mu - dm) : 0.0,
                                        std::sqrt(T) * 0.1);
  J2 += quad::integrate_pieces(below_end, end_pts, opt);

  const double J3 = 2.0 * std::sqrt(2.0 * mu);

  auto log_part = [c](double x) { return upsilon_over_x(x, c); };
  auto log_pts = detail::geometric_points(0.0, mu / T, 0.01 * (1.0 + c));
  for (double x : quad::clustered_points(0.0, mu / T, c, 0.5)) log_pts.push_back(x);
  const double J4 = quad::integrate_pieces(log_part, log_pts, opt);

  return {MKind::plain, (J1 + J2 - J3) / (2.0 * mu) + J4 / rmu, 0.0};
}

// Same integral with the plateau kernel K~.
inline MResult m_tilde_numeric(const PhysParams& p, const QuadOptions& opt = {}) {
  const MResult m = m_numeric(p, opt);
  const double c = p.c();
  const double b = b_of_c(c);
  if (b == 0.0) return {MKind::tilde, m.value, 0.0};
  const double mu = p.mu_bar, T = p.T;
  const double plateau = 1.0 / (2.0 * f_val(b, c));
  auto corr = [&](double x) { return (plateau - upsilon_over_x(x, c)) * std::sqrt(mu + T * x); };
  const double lo = std::max(-b, -mu / T);
  const double v = quad::integrate_pieces(corr, {lo, 0.0, b}, opt) / (2.0 * mu);
  return {MKind::tilde, m.value + v, 0.0};
}

// I(y) - m: the change of the m-integral when K^0 is replaced by K^y.
inline double m_shift(const PhysParams& p, double y, const QuadOptions& opt = {}) {
  detail::check_m_params(p);
  if (y < 0.0) throw std::invalid_argument("m_shift: need y >= 0");
  if (y == 0.0) return 0.0;
  const double mu = p.mu_bar, T = p.T, dm = p.delta_mu, c = p.c();
  auto diff = [&](double t) {
    const double a = std::abs(t);
    const double E = std::hypot(t, y);
    if (a <= T) return (upsilon_over_x(E / T, c) - upsilon_over_x(a / T, c)) / T;
    // 1/E - 1/|t| in closed form, Fermi tails separately
    return -y * y / (a * E * (a + E)) - one_minus_upsilon(E / T, c) / E +
           one_minus_upsilon(a / T, c) / a;
  };
  // t in [-mu, mu] through p = sqrt(mu + t), which makes the integrand smooth at p = 0
  auto inner = [&](double q) { return 2.0 * q * q * diff(q * q - mu); };
  const double scale = std::max(y, T * (1.0 + c));
  std::vector<double> t_pts = quad::clustered_points(-mu, mu, 0.0, 0.01 * scale, 3.0);
  if (dm > y) {
    const double s = std::sqrt(dm * dm - y * y);
    for (double x : quad::clustered_points(-mu, mu, s, T)) t_pts.push_back(x);
    for (double x : quad::clustered_points(-mu, mu, -s, T)) t_pts.push_back(x);
  }
  std::vector<double> q_pts;
  for (double t : t_pts) q_pts.push_back(std::sqrt(std::max(0.0, mu + t)));
  q_pts.push_back(0.0);
  q_pts.push_back(0.5 * std::sqrt(mu));
  const double lower = quad::integrate_pieces(inner, q_pts, opt);
  auto outer = [&](double t) { return diff(t) * std::sqrt(mu + t); };
  const double upper_top = std::max(2.0 * mu, dm + 80.0 * std::max(T, y));
  auto upper_pts = quad::clustered_points(mu, upper_top, dm, T);
  const double upper = quad::integrate_pieces(outer, upper_pts, opt) + quad::integrate_tail(outer, upper_top, opt);
  return (lower + upper) / (2.0 * mu);
}

inline double I_integral(const PhysParams& p, double y, const QuadOptions& opt = {}) {
  return m_numeric(p, opt).value + m_shift(p, y, opt);
}

// max over y >= 0 of I(y): 40-point scan on [0, 10 (dmu + T)] plus bracketed refinement.
inline MResult m_bar_numeric(const PhysParams& p, const QuadOptions& opt = {}) {
  const double m = m_numeric(p, opt).value;
  constexpr int n = 40;
  const double ymax = 10.0 * (p.delta_mu + p.T);
  std::vector<double> ys(n), vals(n);
  int best = 0;
  for (int k = 0; k < n; ++k) {
    ys[k] = ymax * k / (n - 1);
    vals[k] = m_shift(p, ys[k], opt);
    if (vals[k] > vals[best]) best = k;
  }
  if (best == 0) return {MKind::bar, m, 0.0};
  const double lo = ys[best - 1], hi = ys[std::min(best + 1, n - 1)];
  auto r = quad::minimize([&](double y) { return -m_shift(p, y, opt); }, lo, hi, 40);
  double y = r.x, v = -r.value;
  if (vals[best] > v) y = ys[best], v = vals[best];
  if (v <= 0.0) return {MKind::bar, m, 0.0};
  return {MKind::bar, m + v, y};
}

inline MResult m_by_kind(MKind kind, const PhysParams& p, const QuadOptions& opt = {}) {
  switch (kind) {
    case MKind::plain: return m_numeric(p, opt);
    case MKind::tilde: return m_tilde_numeric(p, opt);
    case MKind::bar: return m_bar_numeric(p, opt);
  }
  return m_numeric(p, opt);
}

// mu^{-1/2} (ln(mu/T) + gamma - 2 + ln(8/pi) - kappa(t)).
inline double m_asymptotic(double T, double t, double mu_bar, Kind kind, const QuadOptions& opt = {}) {
  if (!(T > 0.0) || !(mu_bar > 0.0)) throw std::invalid_argument("m_asymptotic: need T > 0 and mu_bar > 0");
  using std::numbers::egamma;
  using std::numbers::pi;
  return (std::log(mu_bar / T) + egamma - 2.0 + std::log(8.0 / pi) - kappa(kind, t, opt)) /
         std::sqrt(mu_bar);
}

}  // namespace polarfermi
