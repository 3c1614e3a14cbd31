#include "enclosure/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace enclosure {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "quadrature", "rule needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D rule;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.nodes.push_back(mid + half * es.eigenvalues()(k));
    rule.weights.push_back(2.0 * v0 * v0 * half);
  }
  return rule;
}

double BallRule::volume() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

BallRule ball_rule(const Vec3& center, double radius, int n_r, int n_theta, int n_phi) {
  const Rule1D rr = gauss_legendre(n_r, 0.0, radius);
  const Rule1D ct = gauss_legendre(n_theta, -1.0, 1.0);
  const Rule1D ph = gauss_legendre(n_phi, 0.0, 2.0 * std::numbers::pi);
  BallRule rule;
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_theta; ++j)
      for (int k = 0; k < n_phi; ++k) {
        const double r = rr.nodes[i], c = ct.nodes[j], s = std::sqrt(1 - c * c);
        const double f = ph.nodes[k];
        rule.nodes.push_back(center + r * Vec3(s * std::cos(f), s * std::sin(f), c));
        rule.weights.push_back(rr.weights[i] * r * r * ct.weights[j] * ph.weights[k]);
      }
  return rule;
}

}  // namespace enclosure
