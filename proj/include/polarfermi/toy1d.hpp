#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "polarfermi/core.hpp"
#include "polarfermi/curve.hpp"
#include "polarfermi/quadrature.hpp"

namespace polarfermi {

// All Delta > 0 solving the 1-D gap equation at one (delta_mu, T).
struct GapSolutionSet {
  PhysParams params;
  std::vector<double> roots;
  int count = 0;
  bool anomaly = false;  // more than two roots
};

namespace detail {

inline void check_1d(const PhysParams& p) {
  p.validate();
  if (!(p.mu_bar > 0.0)) throw std::invalid_argument("1-D model needs mu_bar > 0");
  if (!(p.T > 0.0)) throw std::invalid_argument("1-D model needs T > 0");
}

// (1/pi) int_0^inf dp / K(p^2 - mu) for a kernel given as a function of t.
template <class InvK>
double integrate_1d(InvK inv_k, double mu, double T, double Delta, double dm, const QuadOptions& opt) {
  const double big = std::max({T, Delta, dm});
  const double P = std::sqrt(mu + 60.0 * big);
  auto h = [&](double p) { return inv_k(p * p - mu); };
  std::vector<double> ts = quad::clustered_points(-mu, P * P - mu, 0.0, 0.1 * T);
  if (dm > Delta) {
    const double s = std::sqrt(dm * dm - Delta * Delta);
    for (double x : quad::clustered_points(-mu, P * P - mu, s, 0.1 * T)) ts.push_back(x);
    for (double x : quad::clustered_points(-mu, P * P - mu, -s, 0.1 * T)) ts.push_back(x);
  }
  std::vector<double> ps{0.0, P};
  for (double t : ts) {
    const double p = std::sqrt(std::max(0.0, mu + t));
    if (p > 0.0 && p < P) ps.push_back(p);
  }
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  return (quad::integrate_pieces(h, ps, opt) + quad::integrate_tail(h, P, opt)) / std::numbers::pi;
}

}  // namespace detail

// (1/2 pi) int dp / K^Delta(p^2 - mu) over the real line.
inline double gap_integral_1d(double Delta, const PhysParams& p, const QuadOptions& opt = {}) {
  detail::check_1d(p);
  if (!(Delta >= 0.0)) throw std::invalid_argument("gap_integral_1d: Delta must be >= 0");
  const double T = p.T, c = p.c();
  auto inv_k = [&](double t) { return upsilon_over_x(std::hypot(t, Delta) / T, c) / T; };
  return detail::integrate_1d(inv_k, p.mu_bar, T, Delta, p.delta_mu, opt);
}

// Same integral with the plateau kernel K~ of the 3-D theory.
inline double gap_integral_1d_tilde(const PhysParams& p, const QuadOptions& opt = {}) {
  detail::check_1d(p);
  const double T = p.T, c = p.c();
  const double b = b_of_c(c);
  auto inv_k = [&](double t) { return upsilon_over_x(std::max(std::abs(t) / T, b), c) / T; };
  return detail::integrate_1d(inv_k, p.mu_bar, T, b * T, p.delta_mu, opt);
}

struct GapMaximum {
  double Delta = 0.0;
  double value = 0.0;
};

// max over Delta >= 0: Delta = 0, 40 points on (0, 10 (delta_mu + T)], then Brent around the best.
inline GapMaximum max_gap_integral_1d(const PhysParams& p, const QuadOptions& opt = {}) {
  detail::check_1d(p);
  constexpr int n = 40;
  const double top = 10.0 * (p.delta_mu + p.T);
  std::vector<double> ds(n + 1), vals(n + 1);
  int best = 0;
  for (int k = 0; k <= n; ++k) {
    ds[k] = top * k / n;
    vals[k] = gap_integral_1d(ds[k], p, opt);
    if (vals[k] > vals[best]) best = k;
  }
  if (best == 0) return {0.0, vals[0]};
  const auto m = quad::minimize([&](double d) { return -gap_integral_1d(d, p, opt); }, ds[best - 1],
                                ds[std::min(best + 1, n)], 40);
  if (-m.value < vals[best]) return {ds[best], vals[best]};
  return {m.x, -m.value};
}

inline GapSolutionSet solve_gap_1d(const PhysParams& p, const QuadOptions& opt = {}) {
  detail::check_1d(p);
  const double target = 1.0 / p.coupling;
  auto F = [&](double d) { return gap_integral_1d(d, p, opt) - target; };
  constexpr int n = 400;
  std::vector<double> ds(n), fs(n);
  for (int k = 0; k < n; ++k) {
    ds[k] = p.mu_bar * std::pow(10.0, -8.0 + 12.0 * k / (n - 1));
    fs[k] = F(ds[k]);
  }
  GapSolutionSet s;
  s.params = p;
  for (int k = 0; k + 1 < n; ++k) {
    if (fs[k] == 0.0) {
      s.roots.push_back(ds[k]);
      continue;
    }
    if ((fs[k] > 0.0) != (fs[k + 1] > 0.0) && fs[k + 1] != 0.0)
      s.roots.push_back(quad::find_root(F, ds[k], ds[k + 1], fs[k], fs[k + 1], opt.root_tol));
  }
  if (fs[n - 1] == 0.0) s.roots.push_back(ds[n - 1]);
  // tangential double roots count once
  std::vector<double> merged;
  for (double r : s.roots)
    if (merged.empty() || r - merged.back() > 1e-6 * p.mu_bar) merged.push_back(r);
  s.roots = std::move(merged);
  s.count = static_cast<int>(s.roots.size());
  s.anomaly = s.count > 2;
  return s;
}

// Temperature of the balanced (delta_mu = 0) transition; all kinds agree there.
inline double balanced_Tc_1d(double g, double mu_bar, const QuadOptions& opt = {}) {
  if (!(g > 0.0) || !(mu_bar > 0.0)) throw std::invalid_argument("balanced_Tc_1d: need g > 0 and mu_bar > 0");
  auto H = [&](double T) { return gap_integral_1d(0.0, {mu_bar, 0.0, T, g}, opt) - 1.0 / g; };
  double lo = 1e-8 * mu_bar, hi = 1e4 * mu_bar;
  const double flo = H(lo), fhi = H(hi);
  if (!(flo > 0.0 && fhi < 0.0)) throw NumericalError("toy1d", "no balanced critical temperature for g=" + fmt(g));
  return quad::find_root(H, lo, hi, flo, fhi, opt.root_tol);
}

// The curve functional whose zero set in T defines each boundary:
// i uses Delta = 0, g the maximum over Delta, o the plateau kernel K~.
inline double curve_function_1d(Kind kind, const PhysParams& p, const QuadOptions& opt = {}) {
  switch (kind) {
    case Kind::i: return gap_integral_1d(0.0, p, opt) - 1.0 / p.coupling;
    case Kind::g: return max_gap_integral_1d(p, opt).value - 1.0 / p.coupling;
    case Kind::o: return gap_integral_1d_tilde(p, opt) - 1.0 / p.coupling;
  }
  return 0.0;
}

struct CurveScan {
  std::size_t count = 80;
  double T_min = 1e-4;  // in units of mu_bar
  double T_max = 2.0;
};

// Every T root of the curve function at one delta_mu, descending.
inline std::vector<double> curve_roots_1d(Kind kind, double g, double mu, double dm, const CurveScan& scan = {},
                                          const QuadOptions& opt = {}) {
  if (scan.count < 2) throw std::invalid_argument("curve scan needs >= 2 temperatures");
  auto H = [&](double T) { return curve_function_1d(kind, {mu, dm, T, g}, opt); };
  std::vector<double> Ts(scan.count), hs(scan.count);
  for (std::size_t k = 0; k < scan.count; ++k) {
    Ts[k] = mu * scan.T_min * std::pow(scan.T_max / scan.T_min, double(k) / (scan.count - 1));
    hs[k] = H(Ts[k]);
  }
  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < scan.count; ++k)
    if ((hs[k] > 0.0) != (hs[k + 1] > 0.0))
      roots.push_back(quad::find_root(H, Ts[k], Ts[k + 1], hs[k], hs[k + 1], opt.root_tol));
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

// Boundary T(delta_mu) for kind i (Delta = 0 solves), g (edge of solvability) or o (K~ version).
inline Curve curve_1d(double g, double mu, const std::vector<double>& delta_grid, Kind kind,
                      const CurveScan& scan = {}, const QuadOptions& opt = {}) {
  if (!(g > 0.0)) throw std::invalid_argument("curve_1d: need g > 0");
  if (delta_grid.empty()) throw std::invalid_argument("curve_1d: empty delta_mu grid");
  Curve c;
  c.kind = kind;
  c.Tc = balanced_Tc_1d(g, mu, opt);
  for (double dm : delta_grid) {
    if (!(dm >= 0.0)) throw std::invalid_argument("curve_1d: delta_mu must be >= 0");
    const auto roots = curve_roots_1d(kind, g, mu, dm, scan, opt);
    if (roots.empty()) {
      c.terminated.push_back(dm);
      continue;
    }
    const double T = roots.front();
    c.points.push_back({dm / T, dm, T, dm / c.Tc, T / c.Tc});
    for (std::size_t k = 1; k < roots.size(); ++k) c.other_roots.emplace_back(dm, roots[k]);
  }
  return c;
}

// Number of roots of the curve at this delta_mu lying above T; odd means (delta_mu, T) is inside.
inline int roots_above(const Curve& c, double delta_mu, double T) {
  int n = 0;
  for (const auto& pt : c.points)
    if (pt.delta_mu == delta_mu && pt.T > T) ++n;
  for (const auto& [dm, t] : c.other_roots)
    if (dm == delta_mu && t > T) ++n;
  return n;
}

}  // namespace polarfermi
