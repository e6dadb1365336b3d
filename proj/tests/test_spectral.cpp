#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "polarfermi/spectral.hpp"

using namespace polarfermi;
using std::numbers::pi;

namespace {

// e_l for V = depth exp(-r^2/a^2): the angular integral is 2 e^{-z} i_l(z), z = mu a^2 / 2.
double gaussian_channel(double depth, double a, double mu, int l) {
  const double z = mu * a * a / 2.0;
  const double il = std::sqrt(pi / (2.0 * z)) * boost::math::cyl_bessel_i(l + 0.5, z);
  const double C = depth * a * a * a / (2.0 * std::numbers::sqrt2);
  return std::pow(2.0 * pi, -1.5) * std::sqrt(mu) * 2.0 * pi * C * 2.0 * std::exp(-z) * il;
}

// Eigenvalues of the kernel (2 pi)^{-3/2} mu^{-1/2} V-hat(|p - q|) on a product grid of the sphere.
std::vector<double> dense_sphere_eigenvalues(const RadialPotential& V, double mu, int n_theta, int n_phi) {
  const auto rule = quad::gauss_legendre(static_cast<unsigned>(n_theta));
  const int n = n_theta * n_phi;
  const double R = std::sqrt(mu);
  std::vector<std::array<double, 3>> p(n);
  std::vector<double> w(n);
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j) {
      const double ct = rule.x[i], st = std::sqrt(1.0 - ct * ct), ph = 2.0 * pi * j / n_phi;
      p[i * n_phi + j] = {R * st * std::cos(ph), R * st * std::sin(ph), R * ct};
      w[i * n_phi + j] = mu * rule.w[i] * 2.0 * pi / n_phi;
    }
  Eigen::MatrixXd M(n, n);
  const double pref = std::pow(2.0 * pi, -1.5) / R;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double dx = p[a][0] - p[b][0], dy = p[a][1] - p[b][1], dz = p[a][2] - p[b][2];
      M(a, b) = std::sqrt(w[a] * w[b]) * pref * V.vhat(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// Gaussian amplitude in closed form: the x-integral of exp(a^2 k R x / 2) is a sinh.
double gaussian_phi(double depth, double a, double mu, double k) {
  const double R = std::sqrt(mu);
  const double u = 1.0 / std::sqrt(4.0 * pi * mu);
  const double C = depth * a * a * a / (2.0 * std::numbers::sqrt2);
  const double z = a * a * k * R / 2.0;
  const double shape = z == 0.0 ? 2.0 : 2.0 * std::sinh(z) / z;
  return std::pow(2.0 * pi, -1.5) * u * mu * 2.0 * pi * C * std::exp(-a * a * (k * k + mu) / 4.0) * shape;
}

}  // namespace

TEST(Spectral, GaussianTransformMatchesQuadrature) {
  const auto closed = RadialPotential::gaussian(-1.3, 0.8);
  const auto numeric = RadialPotential::from_function(
      "g", [](double r) { return -1.3 * std::exp(-r * r / 0.64); }, 0.8, 8.0);
  for (double k : {0.0, 0.3, 1.0, 2.5, 6.0}) {
    EXPECT_NEAR(vhat_radial(closed, k), closed.vhat(k), 1e-11) << k;
    EXPECT_NEAR(numeric.vhat(k), closed.vhat(k), 1e-9) << k;
  }
  EXPECT_NEAR(closed.vhat(0.0), -1.3 * 0.512 / (2.0 * std::numbers::sqrt2), 1e-15);
  EXPECT_LT(closed.vhat(0.0), 0.0);
  EXPECT_EQ(closed.vhat(1.7), closed.vhat(-1.7));
  EXPECT_NEAR(numeric.volume_integral(), closed.volume_integral(), 1e-10);
}

TEST(Spectral, ExponentialTransformMatchesQuadrature) {
  const auto V = RadialPotential::exponential(-2.0, 0.5);
  for (double k : {0.0, 0.5, 2.0, 5.0}) EXPECT_NEAR(vhat_radial(V, k), V.vhat(k), 1e-10) << k;
  EXPECT_TRUE(V.vhat_nonpositive(100.0));
}

TEST(Spectral, SampledProfileApproximatesClosedForm) {
  std::vector<double> r, v;
  for (int i = 0; i <= 2000; ++i) {
    r.push_back(8.0 * i / 2000.0);
    v.push_back(-std::exp(-r.back() * r.back()));
  }
  const auto S = RadialPotential::sampled(r, v);
  const auto G = RadialPotential::gaussian(-1.0, 1.0);
  for (double k : {0.0, 1.0, 3.0}) EXPECT_NEAR(S.vhat(k), G.vhat(k), 1e-5) << k;
  EXPECT_NEAR(S.volume_integral() / G.volume_integral(), 1.0, 1e-5);
  EXPECT_THROW(RadialPotential::sampled({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(Spectral, RejectsNonIntegrableProfile) {
  EXPECT_THROW(RadialPotential::from_function(
                   "slow", [](double r) { return -1.0 / (1.0 + r); }, 1.0, 10.0),
               std::invalid_argument);
}

TEST(Spectral, ChannelsMatchBesselClosedForm) {
  const auto V = RadialPotential::gaussian(-1.0, 1.2);
  const auto s = v_mu_spectrum(V, 1.5, 20);
  for (int l = 0; l <= 20; ++l)
    EXPECT_NEAR(s.e_ell[l], gaussian_channel(-1.0, 1.2, 1.5, l), 1e-14 + 1e-11 * std::abs(s.e_ell[l])) << l;
  EXPECT_EQ(s.ground_ell, 0);
  EXPECT_LE(s.e_mu, 0.0);
}

TEST(Spectral, TraceIdentityConverges) {
  const auto V = RadialPotential::gaussian(-1.0, 1.0);
  const auto s40 = v_mu_spectrum(V, 1.0, 40);
  const auto s100 = v_mu_spectrum(V, 1.0, 100);
  EXPECT_LT(std::abs(s40.trace_partial() - s40.trace_exact) / std::abs(s40.trace_exact), 1e-2);
  EXPECT_LT(std::abs(s100.trace_partial() - s100.trace_exact) / std::abs(s100.trace_exact), 1e-3);
  EXPECT_NEAR(s40.trace_exact, -std::pow(pi, 1.5) / (2.0 * pi * pi), 1e-15);
  EXPECT_TRUE(s100.warnings.empty());
}

TEST(Spectral, TraceIdentityWideExponential) {
  // slow channel decay: needs many channels
  const auto V = RadialPotential::exponential(-1.0, 2.0);
  const auto s = v_mu_spectrum(V, 1.0, 100);
  EXPECT_LT(std::abs(s.trace_partial() - s.trace_exact) / std::abs(s.trace_exact), 1e-2);
}

TEST(Spectral, DenseSphereOracle) {
  const auto V = RadialPotential::gaussian(-1.0, 1.5);
  const double mu = 1.0;
  const auto s = v_mu_spectrum(V, mu, 8);
  auto ev = dense_sphere_eigenvalues(V, mu, 22, 44);
  std::vector<double> expected;
  for (int l = 0; l <= 8; ++l)
    for (int m = 0; m < 2 * l + 1; ++m) expected.push_back(s.e_ell[l]);
  std::sort(expected.begin(), expected.end());
  ASSERT_GE(ev.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(ev[i], expected[i], 1e-6) << i;
}

TEST(Spectral, WarnsOnTruncatedMinimum) {
  // V-hat peaked away from k = 0 puts the lowest channel at high ell
  const auto V = RadialPotential::from_function(
      "shell", [](double r) { return -std::exp(-(r - 6.0) * (r - 6.0) / 0.25); }, 0.5, 12.0);
  const auto s = v_mu_spectrum(V, 4.0, 3);
  EXPECT_EQ(s.ground_ell, 3);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Spectral, WFormMatchesTensorGridOracle) {
  const double depth = -1.0, a = 1.0, mu = 1.0;
  const auto V = RadialPotential::gaussian(depth, a);
  const double w = w_mu_form_constant(V, mu);

  const double R = std::sqrt(mu);
  const double A = 4.0 * pi * std::pow(gaussian_phi(depth, a, mu, R), 2);
  auto h = [&](double k) {
    const double ph = gaussian_phi(depth, a, mu, k);
    return k * k / std::abs(k * k - mu) * (4.0 * pi * ph * ph - A) + A;
  };
  const auto rule = quad::gauss_legendre(60);
  double sum = 0.0;
  const std::vector<double> edges{0.0, 0.5 * R, R, 1.5 * R, 2 * R, 4 * R, 8 * R, 16 * R};
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double lo = edges[e], hi = edges[e + 1];
    for (std::size_t j = 0; j < rule.x.size(); ++j)
      sum += 0.5 * (hi - lo) * rule.w[j] * h(lo + 0.5 * (hi - lo) * (rule.x[j] + 1.0));
  }
  // beyond 16 R only -mu A / (k^2 - mu) survives
  const double K = edges.back();
  sum += -mu * A / (2.0 * R) * std::log((K + R) / (K - R));
  EXPECT_NEAR(w / sum, 1.0, 1e-4);
}

TEST(Spectral, WFormIsQuadraticInV) {
  const auto V = RadialPotential::exponential(-1.0, 0.7);
  const double w1 = w_mu_form_constant(V, 1.0);
  const double w2 = w_mu_form_constant(V.scaled(2.0), 1.0);
  EXPECT_NEAR(w2 / w1, 4.0, 1e-8);
  const auto Z = RadialPotential::gaussian(-1e-200, 1.0);
  EXPECT_NEAR(w_mu_form_constant(Z, 1.0), 0.0, 1e-300);
}

TEST(Spectral, RhoIsExactQuadratic) {
  const auto V = RadialPotential::gaussian(-1.0, 1.0);
  const double mu = 1.0;
  const auto s = v_mu_spectrum(V, mu, 8);
  const double w = w_mu_form_constant(V, mu);
  const double l1 = 0.1, l2 = 0.2, l3 = 0.4;
  const double r1 = rho_lambda(V, mu, l1), r2 = rho_lambda(V, mu, l2), r3 = rho_lambda(V, mu, l3);
  // Newton divided differences through the three samples
  const double d12 = (r2 - r1) / (l2 - l1), d23 = (r3 - r2) / (l3 - l2);
  const double c2 = (d23 - d12) / (l3 - l1);
  const double c1 = d12 - c2 * (l1 + l2);
  const double c0 = r1 - c1 * l1 - c2 * l1 * l1;
  EXPECT_NEAR(c0, 0.0, 1e-13);
  EXPECT_NEAR(c1, pi / 2.0 * s.e_mu, 1e-12);
  EXPECT_NEAR(c2, -pi / 2.0 * w, 1e-11);
  EXPECT_LT(rho_lambda(V, mu, 1e-3), 0.0);
  EXPECT_NEAR(rho_lambda(V, mu, 1e-6) / 1e-6, pi / 2.0 * s.e_mu, 1e-6);
  EXPECT_GT(w, 0.0);
  EXPECT_LT(r2, l2 * pi / 2.0 * s.e_mu);
}

TEST(Spectral, RhoRequiresAttractiveTransform) {
  EXPECT_THROW(rho_lambda(RadialPotential::gaussian(1.0, 1.0), 1.0, 0.5), std::invalid_argument);
  // V-hat < 0 at k = 0 but positive at larger k
  const auto mixed = RadialPotential::from_function(
      "mixed", [](double r) { return -std::exp(-r * r / 4.0) + 3.0 * std::exp(-r * r); }, 1.0, 20.0);
  EXPECT_LT(mixed.vhat(0.0), 0.0);
  EXPECT_GT(mixed.vhat(2.0), 0.0);
  EXPECT_NO_THROW(v_mu_spectrum(mixed, 1.0, 10));
  EXPECT_THROW(rho_lambda(mixed, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(critical_curve(mixed, 1.0, 0.5, Kind::i, {0.0}), std::invalid_argument);
}

TEST(Spectral, CriticalCurveBasics) {
  const auto V = RadialPotential::gaussian(-1.0, 1.0);
  const std::vector<double> ts{0.0, 0.5, 1.0, kMonotoneThreshold, 2.0, 3.0, 5.0};
  const auto ci = critical_curve(V, 1.0, 1.0, Kind::i, ts);
  const auto co = critical_curve(V, 1.0, 1.0, Kind::o, ts);
  const auto cg = critical_curve(V, 1.0, 1.0, Kind::g, ts);
  EXPECT_NEAR(ci.Tc, balanced_Tc(1.0, rho_lambda(V, 1.0, 1.0)), 1e-15 * ci.Tc);
  for (const auto* c : {&ci, &co, &cg}) {
    EXPECT_NEAR(c->points[0].T_over_Tc, 1.0, 1e-12);
    EXPECT_EQ(c->points[0].delta_mu, 0.0);
  }
  for (std::size_t j = 0; j < ts.size(); ++j) {
    if (ts[j] <= kMonotoneThreshold) {
      EXPECT_NEAR(ci.points[j].T, co.points[j].T, 1e-12 * ci.Tc);
    }
    EXPECT_LE(ci.points[j].T, cg.points[j].T * (1 + 1e-12));
    EXPECT_LE(cg.points[j].T, co.points[j].T * (1 + 1e-12));
    EXPECT_NEAR(ci.points[j].delta_mu, ts[j] * ci.points[j].T, 1e-15);
  }
  EXPECT_LT(ci.points.back().T, co.points.back().T);
  EXPECT_THROW(critical_curve(V, 1.0, 1.0, Kind::i, {}), std::invalid_argument);
}

TEST(Spectral, InteriorCurveHitsHorizontalAxis) {
  const auto c = universal_curve(Kind::i, {100.0});
  const double target = pi * std::exp(-std::numbers::egamma) / 2.0;
  EXPECT_NEAR(c.points[0].delta_mu_over_Tc / target, 1.0, 0.05);
}
