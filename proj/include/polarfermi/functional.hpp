#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "polarfermi/core.hpp"
#include "polarfermi/quadrature.hpp"
#include "polarfermi/spectral.hpp"
#include "polarfermi/toy1d.hpp"

namespace polarfermi {

// Radial momentum nodes. `weight` already contains the measure: 2 dp on the
// line (even states) or 4 pi p^2 dp in 3-D; `dp` is the bare quadrature weight.
struct MomentumGrid {
  int dim = 1;
  double mu_bar = 1.0;
  std::vector<double> p;
  std::vector<double> dp;
  std::vector<double> weight;

  std::size_t size() const { return p.size(); }
  double t(std::size_t i) const { return p[i] * p[i] - mu_bar; }
};

struct GridOptions {
  std::size_t nodes = 2000;
  std::size_t tail_nodes = 64;
  double tmax_over_T = 200.0;  // p_max^2 = mu + tmax_over_T * T
};

// Gauss-Legendre panels between breakpoints clustered (in t = p^2 - mu) around
// the Fermi level and around t = +-delta_mu, then a mapped panel to infinity.
inline MomentumGrid make_grid(const PhysParams& prm, int dim, const GridOptions& go = {}) {
  prm.validate();
  if (dim != 1 && dim != 3) throw std::invalid_argument("make_grid: dim must be 1 or 3");
  if (!(prm.T > 0.0) || !(prm.mu_bar > 0.0)) throw std::invalid_argument("make_grid: need T > 0 and mu_bar > 0");
  const double mu = prm.mu_bar, T = prm.T, dm = prm.delta_mu;
  const double tmax = go.tmax_over_T * T;
  std::vector<double> ts = quad::clustered_points(-mu, tmax, 0.0, 0.05 * T);
  if (dm > 0.0)
    for (double s : {dm, -dm})
      for (double x : quad::clustered_points(-mu, tmax, s, 0.2 * T)) ts.push_back(x);
  std::vector<double> ps{0.0};
  for (double t : ts) ps.push_back(std::sqrt(std::max(0.0, mu + t)));
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  const double P = ps.back();
  const std::size_t panels = ps.size() - 1;
  const std::size_t body = go.nodes > go.tail_nodes ? go.nodes - go.tail_nodes : go.nodes;
  const auto rule = quad::gauss_legendre(static_cast<unsigned>(std::max<std::size_t>(8, body / panels)));

  MomentumGrid g;
  g.dim = dim;
  g.mu_bar = mu;
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = ps[k], b = ps[k + 1];
    for (std::size_t j = 0; j < rule.x.size(); ++j) {
      g.p.push_back(a + 0.5 * (b - a) * (rule.x[j] + 1.0));
      g.dp.push_back(0.5 * (b - a) * rule.w[j]);
    }
  }
  if (go.tail_nodes > 0) {
    // p = P / s, s in (0, 1)
    const auto tail = quad::gauss_legendre(static_cast<unsigned>(go.tail_nodes));
    for (std::size_t j = tail.x.size(); j-- > 0;) {
      const double s = 0.5 * (tail.x[j] + 1.0);
      g.p.push_back(P / s);
      g.dp.push_back(0.5 * tail.w[j] * P / (s * s));
    }
  }
  for (std::size_t i = 0; i < g.p.size(); ++i)
    g.weight.push_back(dim == 1 ? 2.0 * g.dp[i] : 4.0 * std::numbers::pi * g.p[i] * g.p[i] * g.dp[i]);
  return g;
}

// Translation-invariant BCS state on a grid. Complements 1 - gamma and the
// eigenvalue gaps r - w, s - w are kept separately so that saturated nodes
// (occupations within roundoff of 0 or 1) stay exact.
struct BCSState {
  std::shared_ptr<const MomentumGrid> grid;
  std::vector<double> gamma_plus, gamma_minus;
  std::vector<double> hole_plus, hole_minus;  // 1 - gamma
  std::vector<double> alpha_hat;
  std::vector<double> r_minus_w, s_minus_w;
  // Below this r - w or s - w carry no relative accuracy. Gaps recomputed from
  // occupations lose it through cancellation; closed-form states keep it down to underflow.
  double gap_floor = 1e-8;

  std::size_t size() const { return alpha_hat.size(); }
  double w(std::size_t i) const { return 0.5 * (1.0 - r_minus_w[i] - s_minus_w[i]); }
};

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// log1p(z)/z, 1 at z = 0
inline double log1p_ratio(double z) { return std::abs(z) < 1e-8 ? 1.0 - 0.5 * z : std::log1p(z) / z; }

inline void fill_gaps(BCSState& s, std::size_t i) {
  const double gp = s.gamma_plus[i], gm = s.gamma_minus[i], hp = s.hole_plus[i], hm = s.hole_minus[i];
  const double a = s.alpha_hat[i];
  const double d = 0.5 * ((hp - gm) + (hm - gp));  // 1 - gamma_+ - gamma_-
  const double w = 0.5 * std::hypot(d, 2.0 * a);
  const double r = 0.5 * (1.0 + gp - gm), sv = 0.5 * (1.0 - gp + gm);
  // (r^2 - w^2) = gamma_+ (1 - gamma_-) - alpha^2
  s.r_minus_w[i] = std::max(0.0, (gp * hm - a * a) / (r + w));
  s.s_minus_w[i] = std::max(0.0, (gm * hp - a * a) / (sv + w));
}

inline void check_admissible(const BCSState& s, std::size_t i) {
  const double gp = s.gamma_plus[i], gm = s.gamma_minus[i], a2 = s.alpha_hat[i] * s.alpha_hat[i];
  const double tol = 1e-14;
  const bool ok = gp >= 0.0 && gp <= 1.0 && gm >= 0.0 && gm <= 1.0 && s.hole_plus[i] >= 0.0 &&
                  s.hole_minus[i] >= 0.0 && a2 <= gp * s.hole_minus[i] + tol && a2 <= gm * s.hole_plus[i] + tol &&
                  std::isfinite(s.alpha_hat[i]);
  if (!ok)
    throw std::invalid_argument("inadmissible state at node " + std::to_string(i) + " (gamma+=" + fmt(gp) +
                                ", gamma-=" + fmt(gm) + ", alpha=" + fmt(s.alpha_hat[i]) + ")");
}

}  // namespace detail

inline BCSState make_state(std::shared_ptr<const MomentumGrid> grid, std::vector<double> gp, std::vector<double> gm,
                           std::vector<double> alpha) {
  const std::size_t n = grid->size();
  if (gp.size() != n || gm.size() != n || alpha.size() != n) throw std::invalid_argument("make_state: size mismatch");
  BCSState s;
  s.grid = std::move(grid);
  s.gamma_plus = std::move(gp);
  s.gamma_minus = std::move(gm);
  s.alpha_hat = std::move(alpha);
  s.hole_plus.resize(n);
  s.hole_minus.resize(n);
  s.r_minus_w.resize(n);
  s.s_minus_w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.hole_plus[i] = 1.0 - s.gamma_plus[i];
    s.hole_minus[i] = 1.0 - s.gamma_minus[i];
    detail::check_admissible(s, i);
    detail::fill_gaps(s, i);
  }
  return s;
}

// Copy of `s` with node values replaced where any change is nonzero.
inline BCSState perturbed(const BCSState& s, const std::vector<double>& d_gp, const std::vector<double>& d_gm,
                          const std::vector<double>& d_alpha, double h) {
  BCSState out = s;
  out.gap_floor = std::max(s.gap_floor, 1e-8);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (d_gp[i] == 0.0 && d_gm[i] == 0.0 && d_alpha[i] == 0.0) continue;
    out.gamma_plus[i] += h * d_gp[i];
    out.hole_plus[i] -= h * d_gp[i];
    out.gamma_minus[i] += h * d_gm[i];
    out.hole_minus[i] -= h * d_gm[i];
    out.alpha_hat[i] += h * d_alpha[i];
    detail::check_admissible(out, i);
    detail::fill_gaps(out, i);
  }
  return out;
}

inline BCSState normal_state(const PhysParams& prm, std::shared_ptr<const MomentumGrid> grid) {
  prm.validate();
  if (!(prm.T > 0.0)) throw std::invalid_argument("normal_state: need T > 0");
  const std::size_t n = grid->size();
  BCSState s;
  s.grid = grid;
  s.gamma_plus.resize(n);
  s.gamma_minus.resize(n);
  s.hole_plus.resize(n);
  s.hole_minus.resize(n);
  s.alpha_hat.assign(n, 0.0);
  s.r_minus_w.resize(n);
  s.s_minus_w.resize(n);
  s.gap_floor = std::numeric_limits<double>::min();
  const double T = prm.T, dm = prm.delta_mu;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid->t(i);
    s.gamma_plus[i] = fermi((t - dm) / T);
    s.hole_plus[i] = fermi(-(t - dm) / T);
    s.gamma_minus[i] = fermi((t + dm) / T);
    s.hole_minus[i] = fermi(-(t + dm) / T);
    // alpha = 0: w = |1 - gamma_+ - gamma_-|/2 and the gaps are products of occupations
    if (t >= 0.0) {
      s.r_minus_w[i] = s.gamma_plus[i];
      s.s_minus_w[i] = s.gamma_minus[i];
    } else {
      s.r_minus_w[i] = s.hole_minus[i];
      s.s_minus_w[i] = s.hole_plus[i];
    }
  }
  return s;
}

// State built from a gap function Delta(p) >= 0 given at the grid nodes.
inline BCSState state_from_gap(const std::vector<double>& Delta, const PhysParams& prm,
                               std::shared_ptr<const MomentumGrid> grid) {
  prm.validate();
  if (!(prm.T > 0.0)) throw std::invalid_argument("state_from_gap: need T > 0");
  const std::size_t n = grid->size();
  if (Delta.size() != n) throw std::invalid_argument("state_from_gap: size mismatch");
  if (std::all_of(Delta.begin(), Delta.end(), [](double d) { return d == 0.0; })) return normal_state(prm, grid);
  BCSState s = normal_state(prm, grid);
  const double T = prm.T, dm = prm.delta_mu;
  for (std::size_t i = 0; i < n; ++i) {
    const double D = Delta[i];
    if (!(D >= 0.0)) throw std::invalid_argument("state_from_gap: Delta must be >= 0");
    if (D == 0.0) continue;
    const double t = grid->t(i), at = std::abs(t);
    const double E = std::hypot(t, D);
    const double Fa = fermi((E + dm) / T), Fb = fermi((E - dm) / T);
    // r - w = F(b), s - w = F(a), 2w = 1 - F(a) - F(b)
    const double w = 0.5 * upsilon(E / T, dm / T);
    const double r = Fb + w, sv = Fa + w;
    const double rho = D * D / (E * (E + at));  // 1 - |t|/E
    const double tw = w * at / E;
    s.alpha_hat[i] = D * w / E;
    s.r_minus_w[i] = Fb;
    s.s_minus_w[i] = Fa;
    // gamma_+ = r - t w / E, 1 - gamma_+ = s + t w / E, and the mirror pair
    if (t >= 0.0) {
      s.gamma_plus[i] = Fb + w * rho;
      s.gamma_minus[i] = Fa + w * rho;
      s.hole_plus[i] = sv + tw;
      s.hole_minus[i] = r + tw;
    } else {
      s.gamma_plus[i] = r + tw;
      s.gamma_minus[i] = sv + tw;
      s.hole_plus[i] = Fa + w * rho;
      s.hole_minus[i] = Fb + w * rho;
    }
    if (!(s.gamma_plus[i] >= 0.0 && s.hole_plus[i] >= 0.0 && s.gamma_minus[i] >= 0.0 && s.hole_minus[i] >= 0.0))
      throw NumericalError("functional", "reconstructed occupations leave [0, 1] at p=" + fmt(grid->p[i]));
  }
  return s;
}

inline BCSState state_from_gap_solution(double Delta, const PhysParams& prm, std::shared_ptr<const MomentumGrid> grid) {
  if (!(Delta >= 0.0)) throw std::invalid_argument("state_from_gap_solution: Delta must be >= 0");
  if (Delta == 0.0) return normal_state(prm, grid);
  return state_from_gap(std::vector<double>(grid->size(), Delta), prm, grid);
}

struct NoInteraction {};
// 1-D delta interaction -g delta(x)
struct ContactInteraction {
  double g = 1.0;
};
// lambda V(x) in 3-D
struct RadialInteraction {
  RadialPotential V;
  double lambda = 1.0;
};
using Interaction = std::variant<NoInteraction, ContactInteraction, RadialInteraction>;

namespace detail {

inline void check_interaction(const Interaction& I, const MomentumGrid& g) {
  if (std::holds_alternative<ContactInteraction>(I) && g.dim != 1)
    throw std::invalid_argument("contact interaction is implemented for the 1-D model only");
  if (std::holds_alternative<RadialInteraction>(I) && g.dim != 3)
    throw std::invalid_argument("radial potentials need a 3-D grid");
}

// Position-space radial nodes on [0, range] for the 3-D interaction term.
inline quad::Rule radial_nodes(double range) {
  const auto base = quad::gauss_legendre(32);
  quad::Rule r;
  constexpr int panels = 16;
  for (int k = 0; k < panels; ++k) {
    const double a = range * k / panels, b = range * (k + 1) / panels;
    for (std::size_t j = 0; j < base.x.size(); ++j) {
      r.x.push_back(a + 0.5 * (b - a) * (base.x[j] + 1.0));
      r.w.push_back(0.5 * (b - a) * base.w[j]);
    }
  }
  return r;
}

// alpha(r) = sqrt(2/pi) (1/r) int p alpha-hat(p) sin(pr) dp
inline std::vector<double> to_position(const std::vector<double>& a, const MomentumGrid& g, const quad::Rule& rn) {
  std::vector<double> out(rn.x.size(), 0.0);
  const double pref = std::sqrt(2.0 / std::numbers::pi);
  for (std::size_t j = 0; j < rn.x.size(); ++j) {
    const double r = rn.x[j];
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.dp[i] * g.p[i] * a[i] * std::sin(g.p[i] * r);
    out[j] = pref * s / r;
  }
  return out;
}

}  // namespace detail

// The interaction part of F for pair amplitude `a` (alpha-hat at the nodes).
inline double interaction_energy(const std::vector<double>& a, const MomentumGrid& g, const Interaction& I) {
  detail::check_interaction(I, g);
  if (const auto* c = std::get_if<ContactInteraction>(&I)) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weight[i] * a[i];
    const double a0 = s / std::sqrt(2.0 * std::numbers::pi);
    return -c->g * a0 * a0;
  }
  if (const auto* r = std::get_if<RadialInteraction>(&I)) {
    const auto rn = detail::radial_nodes(r->V.range());
    const auto ax = detail::to_position(a, g, rn);
    double s = 0.0;
    for (std::size_t j = 0; j < rn.x.size(); ++j)
      s += rn.w[j] * 4.0 * std::numbers::pi * rn.x[j] * rn.x[j] * ax[j] * ax[j] * r->V(rn.x[j]);
    return r->lambda * s;
  }
  return 0.0;
}

// lambda (V-hat * alpha-hat)(p) at every node; the convolution carries (2 pi)^{-d/2}.
inline std::vector<double> interaction_field(const std::vector<double>& a, const MomentumGrid& g, const Interaction& I) {
  detail::check_interaction(I, g);
  std::vector<double> out(g.size(), 0.0);
  if (const auto* c = std::get_if<ContactInteraction>(&I)) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weight[i] * a[i];
    std::fill(out.begin(), out.end(), -c->g * s / (2.0 * std::numbers::pi));
  } else if (const auto* r = std::get_if<RadialInteraction>(&I)) {
    // Fourier transform of V(x) alpha(x)
    const auto rn = detail::radial_nodes(r->V.range());
    const auto ax = detail::to_position(a, g, rn);
    const double pref = std::sqrt(2.0 / std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < rn.x.size(); ++j) {
        const double pr = g.p[i] * rn.x[j];
        const double kern = pr < 1e-4 ? rn.x[j] * rn.x[j] : rn.x[j] * std::sin(pr) / g.p[i];
        s += rn.w[j] * kern * r->V(rn.x[j]) * ax[j];
      }
      out[i] = r->lambda * pref * s;
    }
  }
  return out;
}

// -Tr Gamma ln Gamma at one node, from the eigenvalues r +- w, s +- w.
inline double entropy_density(double r_minus_w, double s_minus_w) {
  using detail::xlogx;
  // r + w = 1 - (s - w) and s + w = 1 - (r - w)
  return -(xlogx(r_minus_w) + xlogx(s_minus_w) + (1.0 - s_minus_w) * std::log1p(-s_minus_w) +
           (1.0 - r_minus_w) * std::log1p(-r_minus_w));
}

inline double entropy(const BCSState& s) {
  double S = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) S += s.grid->weight[i] * entropy_density(s.r_minus_w[i], s.s_minus_w[i]);
  return S;
}

inline double free_energy(const BCSState& s, const PhysParams& prm, const Interaction& I) {
  const auto& g = *s.grid;
  const double dm = prm.delta_mu;
  double F = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    detail::check_admissible(s, i);
    const double t = g.t(i);
    const double kin = 0.5 * (t - dm) * s.gamma_plus[i] + 0.5 * (t + dm) * s.gamma_minus[i];
    F += g.weight[i] * (kin - 0.5 * prm.T * entropy_density(s.r_minus_w[i], s.s_minus_w[i]));
  }
  return F + interaction_energy(s.alpha_hat, g, I);
}

// F(a) - F(b) for two states on the same grid, summed node by node.
inline double free_energy_difference(const BCSState& a, const BCSState& b, const PhysParams& prm, const Interaction& I) {
  if (a.grid != b.grid && (a.grid->p != b.grid->p || a.grid->dim != b.grid->dim))
    throw std::invalid_argument("free_energy_difference: states live on different grids");
  const auto& g = *a.grid;
  const double dm = prm.delta_mu;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    detail::check_admissible(a, i);
    detail::check_admissible(b, i);
    const double t = g.t(i);
    // occupation changes taken from the smaller of gamma and 1 - gamma
    const double dp = a.gamma_plus[i] < 0.5 ? a.gamma_plus[i] - b.gamma_plus[i] : b.hole_plus[i] - a.hole_plus[i];
    const double dn = a.gamma_minus[i] < 0.5 ? a.gamma_minus[i] - b.gamma_minus[i] : b.hole_minus[i] - a.hole_minus[i];
    const double kin = 0.5 * (t - dm) * dp + 0.5 * (t + dm) * dn;
    const double dS = entropy_density(a.r_minus_w[i], a.s_minus_w[i]) - entropy_density(b.r_minus_w[i], b.s_minus_w[i]);
    d += g.weight[i] * (kin - 0.5 * prm.T * dS);
  }
  return d + interaction_energy(a.alpha_hat, g, I) - interaction_energy(b.alpha_hat, g, I);
}

struct StationarityReport {
  double max = 0.0;
  double pair = 0.0;       // lambda V-hat * alpha = -(T/4) alpha (f_r + f_s)
  double imbalance = 0.0;  // delta_mu = (T/2) ln((r^2 - w^2)/(s^2 - w^2))
  double kinetic = 0.0;    // p^2 - mu = (T/4)(1 - gamma_+ - gamma_-)(f_r + f_s)
  std::size_t nodes = 0;   // nodes resolved (not saturated)
};

// Relative Euler-Lagrange residuals over all non-saturated nodes.
inline StationarityReport stationarity_residual(const BCSState& s, const PhysParams& prm, const Interaction& I) {
  const auto& g = *s.grid;
  const double T = prm.T, dm = prm.delta_mu;
  const auto field = interaction_field(s.alpha_hat, g, I);
  StationarityReport rep;
  const double saturated = s.gap_floor;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rm = s.r_minus_w[i], sm = s.s_minus_w[i];
    const double t = g.t(i);
    if (!(rm > 0.0) || !(sm > 0.0)) {
      if (std::abs(t) <= T) throw std::invalid_argument("stationarity_residual: boundary state at the Fermi level");
      continue;
    }
    if (std::min(rm, sm) < saturated) {
      if (std::abs(t) <= T) throw std::invalid_argument("stationarity_residual: saturated node at the Fermi level");
      continue;
    }
    ++rep.nodes;
    const double w = s.w(i);
    // f_r(w) = (1/w) ln((r+w)/(r-w)) = (2/(r-w)) log1p(z)/z with z = 2w/(r-w)
    const double fsum = 2.0 / rm * detail::log1p_ratio(2.0 * w / rm) + 2.0 / sm * detail::log1p_ratio(2.0 * w / sm);
    const double d = 0.5 * ((s.hole_plus[i] - s.gamma_minus[i]) + (s.hole_minus[i] - s.gamma_plus[i]));

    const double lhs4 = field[i], rhs4 = -0.25 * T * s.alpha_hat[i] * fsum;
    const double den4 = std::max(std::abs(lhs4), std::abs(rhs4));
    const double r4 = den4 > 0.0 ? std::abs(lhs4 - rhs4) / den4 : 0.0;

    const double rhs7 = 0.5 * T * (std::log(rm) + std::log1p(-sm) - std::log(sm) - std::log1p(-rm));
    const double r7 = std::abs(dm - rhs7) / std::max({dm, std::abs(rhs7), T});

    const double rhs8 = 0.25 * T * d * fsum;
    const double r8 = std::abs(t - rhs8) / std::max({std::abs(t), std::abs(rhs8), T});

    rep.pair = std::max(rep.pair, r4);
    rep.imbalance = std::max(rep.imbalance, r7);
    rep.kinetic = std::max(rep.kinetic, r8);
  }
  if (rep.nodes == 0) throw std::invalid_argument("stationarity_residual: no interior nodes");
  rep.max = std::max({rep.pair, rep.imbalance, rep.kinetic});
  return rep;
}

// d^2/dt^2 F(gamma^0, t g) at t = 0: 2 (interaction form of g) + 2 int K^0 |g-hat|^2.
inline double second_variation_normal(const std::function<double(double)>& profile, const PhysParams& prm,
                                      const Interaction& I, const MomentumGrid& g) {
  prm.validate();
  if (!(prm.T > 0.0)) throw std::invalid_argument("second_variation_normal: need T > 0");
  std::vector<double> gh(g.size());
  double kin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gh[i] = profile(g.p[i]);
    kin += g.weight[i] * K_delta(g.t(i), 0.0, prm) * gh[i] * gh[i];
  }
  return 2.0 * interaction_energy(gh, g, I) + 2.0 * kin;
}

enum class Phase { superfluid, normal, metastable };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::superfluid: return "superfluid";
    case Phase::normal: return "normal";
    case Phase::metastable: return "normal-with-metastable-solutions";
  }
  return "?";
}

struct PhaseResult {
  Phase phase = Phase::normal;
  double F_normal = 0.0;
  double F_best = 0.0;  // lowest F among the gap solutions; F_normal when there are none
  std::vector<double> roots;
  std::vector<double> delta_F;  // F(solution) - F(normal), per root
};

// 1-D contact model with g = prm.coupling: compare each gap solution with the normal state.
inline PhaseResult phase_decision(const PhysParams& prm, const GridOptions& go = {}, const QuadOptions& opt = {}) {
  const auto sol = solve_gap_1d(prm, opt);
  if (sol.anomaly)
    throw NumericalError("functional", "gap equation returned " + std::to_string(sol.count) + " roots at " + prm.describe());
  auto grid = std::make_shared<const MomentumGrid>(make_grid(prm, 1, go));
  const Interaction I = ContactInteraction{prm.coupling};
  const auto normal = normal_state(prm, grid);
  PhaseResult res;
  res.F_normal = free_energy(normal, prm, I);
  res.F_best = res.F_normal;
  res.roots = sol.roots;
  double best = std::numeric_limits<double>::infinity();
  for (double D : sol.roots) {
    const auto st = state_from_gap_solution(D, prm, grid);
    const double d = free_energy_difference(st, normal, prm, I);
    res.delta_F.push_back(d);
    best = std::min(best, d);
  }
  if (!sol.roots.empty()) res.F_best = res.F_normal + best;
  if (sol.roots.empty())
    res.phase = Phase::normal;
  else
    res.phase = best < 0.0 ? Phase::superfluid : Phase::metastable;
  return res;
}

}  // namespace polarfermi
