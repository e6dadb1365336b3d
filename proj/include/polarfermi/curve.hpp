#pragma once

#include <utility>
#include <vector>

#include "polarfermi/core.hpp"

namespace polarfermi {

struct CurvePoint {
  double t = 0.0;  // delta_mu / T
  double delta_mu = 0.0;
  double T = 0.0;
  double delta_mu_over_Tc = 0.0;
  double T_over_Tc = 0.0;
};

// Samples of one phase boundary in the (delta_mu, T) plane.
struct Curve {
  Kind kind = Kind::i;
  double Tc = 0.0;
  std::vector<CurvePoint> points;
  // delta_mu values for which no temperature bracket was found
  std::vector<double> terminated;
  // further (delta_mu, T) roots below the reported curve point
  std::vector<std::pair<double, double>> other_roots;
};

}  // namespace polarfermi
