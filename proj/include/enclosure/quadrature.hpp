#pragma once

#include "enclosure/types.hpp"

#include <vector>

namespace enclosure {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre on [a, b] (Golub-Welsch).
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

struct BallRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  double volume() const;
};

// Product Gauss-Legendre rule in spherical coordinates (r, cos theta, phi); every node is
// strictly inside the ball.
BallRule ball_rule(const Vec3& center, double radius, int n_r = 6, int n_theta = 8, int n_phi = 8);

}  // namespace enclosure
