#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "polarfermi/core.hpp"
#include "polarfermi/curve.hpp"
#include "polarfermi/kappa.hpp"
#include "polarfermi/quadrature.hpp"

namespace polarfermi {

inline const double kInvTwoPi32 = 1.0 / std::pow(2.0 * std::numbers::pi, 1.5);

// Radial interaction V(r) and its transform (2 pi)^{-3/2} int V e^{-ipx} dx.
class RadialPotential {
 public:
  static RadialPotential gaussian(double depth, double width) {
    check_shape(width);
    RadialPotential p("gaussian", width, 8.0 * width);
    p.profile_ = [depth, width](double r) { return depth * std::exp(-(r * r) / (width * width)); };
    p.closed_ = [depth, width](double k) {
      return depth * width * width * width / (2.0 * std::numbers::sqrt2) *
             std::exp(-k * k * width * width / 4.0);
    };
    p.integral_ = depth * std::pow(std::numbers::pi, 1.5) * width * width * width;
    return p;
  }

  static RadialPotential exponential(double depth, double width) {
    check_shape(width);
    RadialPotential p("exponential", width, 60.0 * width);
    p.profile_ = [depth, width](double r) { return depth * std::exp(-r / width); };
    p.closed_ = [depth, width](double k) {
      const double s = 1.0 + k * k * width * width;
      return depth * kInvTwoPi32 * 8.0 * std::numbers::pi * width * width * width / (s * s);
    };
    p.integral_ = depth * 8.0 * std::numbers::pi * width * width * width;
    return p;
  }

  // Piecewise-linear profile through (r_k, v_k), zero beyond the last radius.
  static RadialPotential sampled(std::vector<double> r, std::vector<double> v) {
    if (r.size() < 2 || r.size() != v.size()) throw std::invalid_argument("sampled potential needs >= 2 matching samples");
    if (r.front() < 0.0 || !std::is_sorted(r.begin(), r.end()) ||
        std::adjacent_find(r.begin(), r.end()) != r.end())
      throw std::invalid_argument("sampled potential radii must be strictly increasing and >= 0");
    const double reach = r.back();
    double h = reach;
    for (std::size_t i = 1; i < r.size(); ++i) h = std::min(h, r[i] - r[i - 1]);
    RadialPotential p("sampled", reach / 4.0, reach);
    auto rr = std::make_shared<const std::vector<double>>(std::move(r));
    auto vv = std::make_shared<const std::vector<double>>(std::move(v));
    p.profile_ = [rr, vv](double x) {
      if (x >= rr->back()) return 0.0;
      if (x <= rr->front()) return vv->front();
      const auto it = std::upper_bound(rr->begin(), rr->end(), x);
      const std::size_t j = static_cast<std::size_t>(it - rr->begin());
      const double w = (x - (*rr)[j - 1]) / ((*rr)[j] - (*rr)[j - 1]);
      return (1.0 - w) * (*vv)[j - 1] + w * (*vv)[j];
    };
    p.knots_ = rr;
    p.knot_values_ = vv;
    p.integral_ = std::pow(2.0 * std::numbers::pi, 1.5) * vhat_radial(p, 0.0, QuadOptions{});
    p.tabulate(std::min(std::numbers::pi / h, 40.0 / p.length_));
    return p;
  }

  // Arbitrary profile; `range` is the radius beyond which V is negligible.
  static RadialPotential from_function(std::string name, std::function<double(double)> v, double length, double range) {
    check_shape(length);
    if (!(range > 0.0)) throw std::invalid_argument("potential range must be positive");
    RadialPotential p(std::move(name), length, range);
    p.profile_ = std::move(v);
    auto r2v = [&p](double x) { return x * x * p.profile_(x); };
    auto r2a = [&p](double x) { return x * x * std::abs(p.profile_(x)); };
    const double body = quad::integrate(r2a, 0.0, range);
    const double beyond = quad::integrate(r2a, range, 2.0 * range);
    if (!(beyond <= 1e-8 * body)) throw std::invalid_argument("potential '" + p.name_ + "' is not integrable on the given range");
    p.integral_ = 4.0 * std::numbers::pi * quad::integrate(r2v, 0.0, range);
    p.tabulate(40.0 / length);
    return p;
  }

  double operator()(double r) const { return profile_(r); }

  double vhat(double k) const {
    k = std::abs(k);
    if (closed_) return closed_(k);
    if (k >= k_table_) return 0.0;
    return scale_ * (*table_)(k);
  }

  // int V d^3x
  double volume_integral() const { return integral_; }
  const std::string& name() const { return name_; }
  double length() const { return length_; }
  double range() const { return range_; }
  bool has_closed_form() const { return static_cast<bool>(closed_); }

  RadialPotential scaled(double factor) const {
    RadialPotential p = *this;
    auto prof = profile_;
    p.profile_ = [prof, factor](double r) { return factor * prof(r); };
    if (closed_) {
      auto cl = closed_;
      p.closed_ = [cl, factor](double k) { return factor * cl(k); };
    } else {
      p.scale_ = scale_ * factor;
    }
    p.integral_ = factor * integral_;
    return p;
  }

  // V-hat(k) <= 0 on a grid covering the relevant momenta.
  bool vhat_nonpositive(double k_max, int n = 400) const {
    for (int i = 0; i <= n; ++i)
      if (vhat(k_max * i / n) > 0.0) return false;
    return true;
  }

 private:
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

  RadialPotential(std::string name, double length, double range)
      : name_(std::move(name)), length_(length), range_(range) {}

  static void check_shape(double width) {
    if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("potential width must be positive");
  }

  void tabulate(double k_max);

  std::string name_;
  double length_;
  double range_;
  double integral_ = 0.0;
  double scale_ = 1.0;
  double k_table_ = 0.0;
  std::function<double(double)> profile_;
  std::function<double(double)> closed_;
  std::shared_ptr<const Spline> table_;
  std::shared_ptr<const std::vector<double>> knots_;
  std::shared_ptr<const std::vector<double>> knot_values_;

  friend double vhat_radial(const RadialPotential& V, double k, const QuadOptions& opt);
};

// sqrt(2/pi) (1/k) int_0^inf r V(r) sin(kr) dr by quadrature over half periods.
inline double vhat_radial(const RadialPotential& V, double k, const QuadOptions& opt = {}) {
  k = std::abs(k);
  const double R = V.range();
  const double pref = std::sqrt(2.0 / std::numbers::pi);
  std::vector<double> pts{0.0, R};
  const double step = std::min(V.length(), k > 0.0 ? std::numbers::pi / k : R);
  for (double r = step; r < R; r += step) pts.push_back(r);
  if (V.knots_) {
    // piecewise-linear profile: fixed 8-point rule on each segment, split when k h is large
    static const quad::Rule rule = quad::gauss_legendre(8);
    const auto& r = *V.knots_;
    const auto& v = *V.knot_values_;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const int parts = 1 + static_cast<int>(k * (r[i + 1] - r[i]));
      const double w = (r[i + 1] - r[i]) / parts;
      for (int m = 0; m < parts; ++m) {
        const double a = r[i] + m * w;
        for (std::size_t j = 0; j < rule.x.size(); ++j) {
          const double x = a + 0.5 * w * (rule.x[j] + 1.0);
          const double kern = k * x < 1e-4 ? x * x * (1.0 - k * k * x * x / 6.0) : x * std::sin(k * x) / k;
          const double vx = v[i] + (v[i + 1] - v[i]) * (x - r[i]) / (r[i + 1] - r[i]);
          sum += 0.5 * w * rule.w[j] * kern * vx;
        }
      }
    }
    return pref * sum;
  }
  if (k == 0.0) {
    auto g = [&V](double r) { return r * r * V.profile_(r); };
    QuadOptions o = opt;
    o.max_segments = std::max(o.max_segments, 4 * pts.size());
    return pref * quad::integrate_pieces(g, pts, o);
  }
  auto g = [&V, k](double r) {
    // r sin(kr)/k, exact near r = 0
    const double kr = k * r;
    const double s = std::abs(kr) < 1e-4 ? r * r * (1.0 - kr * kr / 6.0) : r * std::sin(kr) / k;
    return s * V.profile_(r);
  };
  QuadOptions o = opt;
  o.abs_tol = std::max(o.abs_tol, 1e-13 * std::abs(V.volume_integral()));
  o.max_segments = std::max(o.max_segments, 4 * pts.size());
  return pref * quad::integrate_pieces(g, pts, o);
}

inline void RadialPotential::tabulate(double k_max) {
  // V-hat is even, so the slope at k = 0 vanishes; beyond k_max it is treated as 0
  constexpr int n = 4001;
  std::vector<double> vals(n);
  const double h = k_max / (n - 1);
  for (int i = 0; i < n; ++i) vals[i] = vhat_radial(*this, i * h);
  table_ = std::make_shared<const Spline>(vals.begin(), vals.end(), 0.0, h, 0.0);
  k_table_ = k_max;
}

struct SphereSpectrum {
  double mu_bar = 0.0;
  int ell_max = 0;
  std::vector<double> e_ell;
  double e_mu = 0.0;
  int ground_ell = 0;
  double trace_exact = 0.0;
  std::optional<double> w_form;
  std::optional<double> rho;
  std::vector<std::string> warnings;

  double trace_partial() const {
    double s = 0.0;
    for (std::size_t l = 0; l < e_ell.size(); ++l) s += (2.0 * l + 1.0) * e_ell[l];
    return s;
  }
};

// Legendre-channel eigenvalues of V_mu via Funk-Hecke.
inline SphereSpectrum v_mu_spectrum(const RadialPotential& V, double mu_bar, int ell_max) {
  if (!(mu_bar > 0.0)) throw std::invalid_argument("v_mu_spectrum: need mu_bar > 0");
  if (ell_max < 0) throw std::invalid_argument("v_mu_spectrum: need ell_max >= 0");
  const auto rule = quad::gauss_legendre(static_cast<unsigned>(4 * ell_max + 200));
  const std::size_t n = rule.x.size();
  std::vector<double> kern(n), p_prev(n, 1.0), p_cur(rule.x);
  for (std::size_t j = 0; j < n; ++j) kern[j] = rule.w[j] * V.vhat(std::sqrt(2.0 * mu_bar * (1.0 - rule.x[j])));
  const double pref = kInvTwoPi32 * std::sqrt(mu_bar) * 2.0 * std::numbers::pi;

  SphereSpectrum s;
  s.mu_bar = mu_bar;
  s.ell_max = ell_max;
  s.e_ell.resize(static_cast<std::size_t>(ell_max) + 1);
  for (int l = 0; l <= ell_max; ++l) {
    const std::vector<double>& P = l == 0 ? p_prev : p_cur;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += kern[j] * P[j];
    s.e_ell[l] = pref * sum;
    if (l >= 1) {
      // advance P_{l-1}, P_l -> P_l, P_{l+1}
      for (std::size_t j = 0; j < n; ++j) {
        const double next = ((2.0 * l + 1.0) * rule.x[j] * p_cur[j] - l * p_prev[j]) / (l + 1.0);
        p_prev[j] = p_cur[j];
        p_cur[j] = next;
      }
    }
  }
  const auto it = std::min_element(s.e_ell.begin(), s.e_ell.end());
  s.ground_ell = static_cast<int>(it - s.e_ell.begin());
  s.e_mu = std::min(*it, 0.0);
  s.trace_exact = std::sqrt(mu_bar) * V.volume_integral() / (2.0 * std::numbers::pi * std::numbers::pi);
  if (ell_max > 0 && s.ground_ell == ell_max)
    s.warnings.push_back("minimum eigenvalue at ell_max = " + std::to_string(ell_max) + "; truncation suspect");
  if (ell_max >= 10) {
    double big = 0.0;
    for (double e : s.e_ell) big = std::max(big, std::abs(e));
    const double floor = 1e-13 * big;  // channels at roundoff level carry no information
    for (int l = ell_max - 9; l <= ell_max; ++l)
      if (std::abs(s.e_ell[l]) > floor && std::abs(s.e_ell[l]) > std::abs(s.e_ell[l - 1])) {
        s.warnings.push_back("channel eigenvalues not decaying over the last 10 channels");
        break;
      }
  }
  return s;
}

namespace detail {

// phi-hat(k) for the constant normalized u on the Fermi sphere (radial function of |p| = k).
class FermiSphereAmplitude {
 public:
  FermiSphereAmplitude(const RadialPotential& V, double mu_bar) : V_(V), mu_(mu_bar), rule_(quad::gauss_legendre(256)) {}

  double operator()(double k) const {
    const double R = std::sqrt(mu_);
    const double u = 1.0 / std::sqrt(4.0 * std::numbers::pi * mu_);
    double sum = 0.0;
    for (std::size_t j = 0; j < rule_.x.size(); ++j) {
      const double s2 = std::max(0.0, k * k + mu_ - 2.0 * k * R * rule_.x[j]);
      sum += rule_.w[j] * V_.vhat(std::sqrt(s2));
    }
    return kInvTwoPi32 * u * mu_ * 2.0 * std::numbers::pi * sum;
  }

 private:
  const RadialPotential& V_;
  double mu_;
  quad::Rule rule_;
};

}  // namespace detail

// <u|W_mu|u> for the constant u:
//   int_0^inf dk [ k^2/|k^2 - mu| 4 pi (phi(k)^2 - phi(R)^2) + 4 pi phi(R)^2 ],  R = sqrt(mu).
inline double w_mu_form_constant(const RadialPotential& V, double mu_bar, const QuadOptions& opt = {}) {
  if (!(mu_bar > 0.0)) throw std::invalid_argument("w_mu_form_constant: need mu_bar > 0");
  const detail::FermiSphereAmplitude phi(V, mu_bar);
  const double R = std::sqrt(mu_bar);
  const double phiR = phi(R);
  const double A = phiR * phiR;
  const double four_pi = 4.0 * std::numbers::pi;

  // the bracket must vanish linearly at the Fermi sphere
  auto gap = [&](double eps) { return std::abs(std::pow(phi(R * (1.0 + eps)), 2) - A); };
  const double coarse = gap(1e-3), fine = gap(1e-6);
  if (fine > 1e-2 * coarse + 1e-14 * (A + 1e-300))
    throw NumericalError("spectral", "W-form difference does not vanish at the Fermi sphere (mu_bar=" + fmt(mu_bar) + ")");

  // (phi(k)^2 - A) / (k^2 - mu) is smooth through k = R; close to R it is
  // interpolated from k = R -+ delta, where the direct quotient is still accurate
  const double delta = 1e-3 * R;
  auto quotient = [&](double k) {
    const double p = phi(k);
    return (p * p - A) / (k * k - mu_bar);
  };
  const double q_lo = quotient(R - delta), q_hi = quotient(R + delta);
  auto h = [&](double k) {
    const double d = k * k - mu_bar;
    if (k > 2.0 * R) {
      // same integrand without the cancellation between k^2 q and A
      const double p = phi(k);
      return four_pi * (k * k * p * p - mu_bar * A) / d;
    }
    const double q = std::abs(k - R) < delta ? q_lo + (q_hi - q_lo) * (k - R + delta) / (2.0 * delta) : quotient(k);
    return four_pi * (k * k * (d < 0.0 ? -q : q) + A);
  };
  const double L = std::max(R, 1.0 / V.length());
  auto pts = quad::clustered_points(0.0, R + 20.0 * L, R, delta);
  const double top = pts.back();
  QuadOptions o = opt;
  o.rel_tol = std::max(opt.rel_tol, 1e-10);
  o.abs_tol = std::max(opt.abs_tol, 1e-14 * four_pi * (A + 1e-300));
  return quad::integrate_pieces(h, pts, o) + quad::integrate_tail(h, top, o);
}

inline double rho_from(double e_mu, double w_form, double mu_bar, double lambda) {
  using std::numbers::pi;
  return lambda * (pi / (2.0 * std::sqrt(mu_bar))) * e_mu - lambda * lambda * (pi / (2.0 * mu_bar)) * w_form;
}

namespace detail {

inline double vhat_check_range(const RadialPotential& V, double mu_bar) {
  return 4.0 * std::sqrt(mu_bar) + 40.0 / V.length();
}

inline void require_attractive(const RadialPotential& V, double mu_bar, const SphereSpectrum& s) {
  if (!V.vhat_nonpositive(vhat_check_range(V, mu_bar)))
    throw std::invalid_argument("potential '" + V.name() + "' has V-hat > 0 somewhere; the constant ground state is not guaranteed");
  if (!(s.e_mu < 0.0)) throw std::invalid_argument("e_mu >= 0: no weak-coupling pairing for this potential");
  if (s.ground_ell != 0) throw std::invalid_argument("ground state is not the constant (ell = 0) channel");
}

}  // namespace detail

inline double rho_lambda(const RadialPotential& V, double mu_bar, double lambda, const QuadOptions& opt = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rho_lambda: need lambda > 0");
  const auto s = v_mu_spectrum(V, mu_bar, 8);
  detail::require_attractive(V, mu_bar, s);
  return rho_from(s.e_mu, w_mu_form_constant(V, mu_bar, opt), mu_bar, lambda);
}

// Spectrum together with the W-form and rho(lambda) for the ell = 0 ground state.
inline SphereSpectrum analyze_potential(const RadialPotential& V, double mu_bar, int ell_max, double lambda,
                                        const QuadOptions& opt = {}) {
  auto s = v_mu_spectrum(V, mu_bar, ell_max);
  s.w_form = w_mu_form_constant(V, mu_bar, opt);
  if (lambda > 0.0 && s.e_mu < 0.0 && s.ground_ell == 0) s.rho = rho_from(s.e_mu, *s.w_form, mu_bar, lambda);
  return s;
}

// Weak-coupling critical temperature with effective coupling rho < 0.
inline double balanced_Tc(double mu_bar, double rho) {
  using std::numbers::egamma;
  using std::numbers::pi;
  if (!(rho < 0.0)) throw std::invalid_argument("balanced_Tc: need rho < 0");
  return mu_bar * (8.0 / pi) * std::exp(egamma - 2.0 + pi / (2.0 * std::sqrt(mu_bar) * rho));
}

inline Curve critical_curve(const RadialPotential& V, double mu_bar, double lambda, Kind kind,
                            const std::vector<double>& t_grid, const QuadOptions& opt = {}) {
  if (t_grid.empty()) throw std::invalid_argument("critical_curve: empty t grid");
  for (double t : t_grid)
    if (!(t >= 0.0)) throw std::invalid_argument("critical_curve: t must be >= 0");
  const double rho = rho_lambda(V, mu_bar, lambda, opt);
  if (!(rho < 0.0)) throw std::invalid_argument("critical_curve: rho(lambda) >= 0");
  const double Tc = balanced_Tc(mu_bar, rho);
  const double k0 = kappa(kind, 0.0, opt);
  Curve c;
  c.kind = kind;
  c.Tc = Tc;
  for (double t : t_grid) {
    const double ratio = std::exp(-(kappa(kind, t, opt) - k0));
    c.points.push_back({t, t * ratio * Tc, ratio * Tc, t * ratio, ratio});
  }
  return c;
}

// The same curve in T_c units only, which needs no potential.
inline Curve universal_curve(Kind kind, const std::vector<double>& t_grid, const QuadOptions& opt = {}) {
  if (t_grid.empty()) throw std::invalid_argument("universal_curve: empty t grid");
  const double k0 = kappa(kind, 0.0, opt);
  Curve c;
  c.kind = kind;
  c.Tc = 1.0;
  for (double t : t_grid) {
    const double ratio = std::exp(-(kappa(kind, t, opt) - k0));
    c.points.push_back({t, t * ratio, ratio, t * ratio, ratio});
  }
  return c;
}

}  // namespace polarfermi
