#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "polarfermi/error.hpp"

namespace polarfermi {

// Tolerances shared by every adaptive routine in the library.
struct QuadOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  double fail_tol = 1e-6;
  std::size_t max_segments = 4000;
  double root_tol = 1e-13;
};

namespace quad {

namespace detail {

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One 61-point Gauss-Kronrod panel. Boost reports the error of the rule on the
// reference interval, so it is rescaled here.
template <class F>
Segment gk_panel(F& f, double a, double b) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, err * 0.5 * (b - a)};
}

}  // namespace detail

// Globally adaptive integration over the pieces of a breakpoint list
// (sorted and deduplicated here); the tolerance is relative to the total.
template <class F>
double integrate_pieces(F&& f, std::vector<double> pts, const QuadOptions& opt = {}) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::priority_queue<detail::Segment> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gk_panel(f, pts[i], pts[i + 1]);
    total += s.value;
    error += s.error;
    heap.push(s);
  }
  std::size_t segments = heap.size();
  while (!heap.empty() && error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
         segments < opt.max_segments) {
    const auto s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      error -= s.error;
      heap.push({s.a, s.b, s.value, 0.0});
      continue;
    }
    const auto l = detail::gk_panel(f, s.a, mid);
    const auto r = detail::gk_panel(f, mid, s.b);
    total += l.value + r.value - s.value;
    error += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    ++segments;
  }
  total = 0.0;
  error = 0.0;
  for (; !heap.empty(); heap.pop()) {
    total += heap.top().value;
    error += heap.top().error;
  }
  if (!std::isfinite(total)) {
    throw NumericalError("quadrature", "non-finite integral on [" + fmt(pts.front()) + ", " +
                                           fmt(pts.back()) + "]");
  }
  if (error > std::max(opt.abs_tol, opt.fail_tol * std::abs(total))) {
    throw NumericalError("quadrature", "no convergence on [" + fmt(pts.front()) + ", " +
                                           fmt(pts.back()) + "], error estimate " + fmt(error));
  }
  return total;
}

template <class F>
double integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  return integrate_pieces(f, {a, b}, opt);
}

// Integral over [a, inf) with a > 0, via x = a/s.
template <class F>
double integrate_tail(F&& f, double a, const QuadOptions& opt = {}) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_tail: lower limit must be positive");
  auto g = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double x = a / s;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x) * (a / (s * s));
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Points lo < x < hi of the sequence center +- scale * ratio^k, plus center itself.
inline std::vector<double> clustered_points(double lo, double hi, double center, double scale,
                                            double ratio = 2.0) {
  std::vector<double> pts{lo, hi};
  if (center > lo && center < hi) pts.push_back(center);
  for (double d = scale; d < 4.0 * (hi - lo) + scale; d *= ratio) {
    if (center - d > lo && center - d < hi) pts.push_back(center - d);
    if (center + d > lo && center + d < hi) pts.push_back(center + d);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

struct Minimum {
  double x;
  double value;
};

// Bracketed 1-D minimization (golden section with parabolic steps).
template <class F>
Minimum minimize(F&& f, double a, double b, int bits = 40) {
  std::uintmax_t it = 200;
  auto r = boost::math::tools::brent_find_minima(f, a, b, bits, it);
  return {r.first, r.second};
}

// Root of f on a sign-changing bracket [a, b].
template <class F>
double find_root(F&& f, double a, double b, double fa, double fb, double rel_tol = 1e-13) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NumericalError("roots", "bracket does not change sign");
  std::uintmax_t it = 300;
  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
  };
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
  return 0.5 * (r.first + r.second);
}

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// n-point Gauss-Legendre rule on [-1, 1].
inline Rule gauss_legendre(unsigned n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule r;
  r.x.reserve(n);
  r.w.reserve(n);
  const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
  auto weight = [n](double x) {
    const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(n), x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    r.x.push_back(-*it);
    r.w.push_back(weight(*it));
  }
  for (double z : zeros) {
    r.x.push_back(z);
    r.w.push_back(weight(z));
  }
  return r;
}

}  // namespace quad
}  // namespace polarfermi
