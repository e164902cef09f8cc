#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "krylovlab/errors.hpp"
#include "krylovlab/linop.hpp"

namespace krylovlab::quadrature {

struct Rule {
  RealVector nodes;
  RealVector weights;
};

/// Gauss-Legendre rule with n points on [a, b]. Newton iteration on the
/// three-term recurrence for P_n, started from the Chebyshev-like guess.
inline Rule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  if (n < 1) throw ParameterError("gauss_legendre: n must be positive");
  Rule rule{RealVector(n), RealVector(n)};
  const int half = (n + 1) / 2;
  const double mid = 0.5 * (a + b);
  const double len = 0.5 * (b - a);
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) <= 1e-15) {
        // refresh derivative at the converged node
        p1 = 1.0;
        p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        dp = n * (z * p1 - p2) / (z * z - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes(i) = mid - len * z;
    rule.nodes(n - 1 - i) = mid + len * z;
    rule.weights(i) = len * w;
    rule.weights(n - 1 - i) = len * w;
  }
  return rule;
}

/// Composite Gauss-Legendre: `panels` equal panels of `points` nodes each.
inline Rule composite_gauss_legendre(int panels, int points, double a, double b) {
  if (panels < 1) throw ParameterError("composite_gauss_legendre: panels must be positive");
  const Rule ref = gauss_legendre(points, 0.0, 1.0);
  const double h = (b - a) / panels;
  Rule rule{RealVector(panels * points), RealVector(panels * points)};
  for (int p = 0; p < panels; ++p) {
    for (int j = 0; j < points; ++j) {
      rule.nodes(p * points + j) = a + h * (p + ref.nodes(j));
      rule.weights(p * points + j) = h * ref.weights(j);
    }
  }
  return rule;
}

/// Integrals over [0, t_i] of the Lagrange basis on nodes t (all in [0,1]):
/// entry (i, j) = int_0^{t_i} l_j(s) ds. Exact for polynomials of degree < t.size().
inline Eigen::MatrixXd lagrange_partial_integrals(const RealVector& t) {
  const Index n = t.size();
  // Work on u = 2t - 1 in [-1, 1], where the Vandermonde matrix of the
  // small panel rules is well conditioned.
  const RealVector u = (2.0 * t.array() - 1.0).matrix();
  Eigen::MatrixXd vander(n, n);
  for (Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Index k = 0; k < n; ++k) {
      vander(i, k) = p;
      p *= u(i);
    }
  }
  const Eigen::MatrixXd coeff = vander.fullPivLu().inverse();  // column j: coefficients of l_j
  Eigen::MatrixXd out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      double p = u(i);
      double lower = -1.0;
      for (Index k = 0; k < n; ++k) {
        s += coeff(k, j) * (p - lower) / static_cast<double>(k + 1);
        p *= u(i);
        lower = -lower;
      }
      out(i, j) = 0.5 * s;
    }
  }
  return out;
}

}  // namespace krylovlab::quadrature
