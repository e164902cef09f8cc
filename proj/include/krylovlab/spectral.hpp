#pragma once

// Scalar spectral measures of self-adjoint truncations, functional calculus
// h(A)g, growth of ||A^k g|| and the isometry h -> h(A)g from L^2(mu_g).
// Measures are atomic: every truncated operator has pure point spectrum.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "krylovlab/linop.hpp"

namespace krylovlab {

struct Atom {
  double lambda = 0.0;
  double weight = 0.0;
};

struct SpectralMeasure {
  std::vector<Atom> atoms;  // ascending in lambda
  std::string operator_id;
  std::string vector_id;

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }

  /// sum_i w_i lambda_i^k
  double moment(int k) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight * std::pow(a.lambda, k);
    return s;
  }
};

/// Eigenpairs of a Hermitian truncation.
struct Eigensystem {
  RealVector values;  // ascending
  Matrix vectors;
};

inline Eigensystem hermitian_eigensystem(const Operator& op) {
  if (op.dim() > 2000) {
    throw OracleUnavailableError("spectral: dimension " + std::to_string(op.dim()) +
                                 " too large for dense eigendecomposition");
  }
  const double defect = structure_defect(op, 1.0);
  if (defect > 1e-10) {
    throw WrongClassError("spectral: operator '" + op.name() + "' is not symmetric (defect " +
                          std::to_string(defect) + ")");
  }
  Matrix a = op.dense();
  a = 0.5 * (a + a.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("spectral: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// mu_g: atoms (lambda_i, |<v_i,g>|^2), eigenvalues closer than
/// 1e-12 * spread merged, zero-weight atoms (below 1e-15 ||g||^2) dropped.
inline SpectralMeasure spectral_measure(const Operator& op, const HVector& g,
                                        std::string vector_id = "g") {
  require_same_space(op.space(), g.space(), "spectral_measure");
  const Eigensystem es = hermitian_eigensystem(op);
  const Vector coef = es.vectors.adjoint() * g.coords();
  const Index n = es.values.size();
  const double spread = es.values(n - 1) - es.values(0);
  const double gap = 1e-12 * (spread > 0.0 ? spread : std::max(1.0, std::abs(es.values(0))));
  const double drop = 1e-15 * g.coords().squaredNorm();

  SpectralMeasure mu;
  mu.operator_id = op.name();
  mu.vector_id = std::move(vector_id);
  Index i = 0;
  while (i < n) {
    double lam_sum = 0.0;
    double w = 0.0;
    Index j = i;
    for (; j < n && es.values(j) - es.values(i) <= gap; ++j) {
      lam_sum += es.values(j);
      w += std::norm(coef(j));
    }
    if (w > drop) mu.atoms.push_back({lam_sum / static_cast<double>(j - i), w});
    i = j;
  }
  return mu;
}

struct GrowthSeries {
  std::vector<double> values;  // r_k = ||A^k g||^{1/k}, k = 1, 2, ...
  bool truncated = false;
  std::string reason;
};

/// ||A^k g||^{1/k} for k = 1..k_max, via normalized repeated application
/// with the log-norm accumulated separately.
inline GrowthSeries bounded_vector_growth(const Operator& op, const HVector& g, int k_max) {
  require_same_space(op.space(), g.space(), "bounded_vector_growth");
  GrowthSeries out;
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.truncated = true;
    out.reason = "g = 0";
    return out;
  }
  Vector v = g.coords() / gnorm;
  double log_norm = std::log(gnorm);
  for (int k = 1; k <= k_max; ++k) {
    v = op.apply(v);
    const double s = v.stableNorm();
    if (s == 0.0) {
      out.truncated = true;
      out.reason = "A^" + std::to_string(k) + " g = 0 (nilpotent on the window)";
      break;
    }
    if (!std::isfinite(s)) {
      out.truncated = true;
      out.reason = "overflow at k=" + std::to_string(k);
      break;
    }
    log_norm += std::log(s);
    v *= 1.0 / s;  // complex division by s would form s^2
    const double r = std::exp(log_norm / k);
    if (!std::isfinite(r)) {
      out.truncated = true;
      out.reason = "r_k not representable at k=" + std::to_string(k);
      break;
    }
    out.values.push_back(r);
  }
  return out;
}

using SpectralFunction = std::function<Complex(double)>;

namespace detail {

inline Vector apply_function(const Eigensystem& es, const Vector& g, const SpectralFunction& h,
                             double weight_tol) {
  const Vector coef = es.vectors.adjoint() * g;
  Vector out = Vector::Zero(g.size());
  for (Index i = 0; i < es.values.size(); ++i) {
    if (std::norm(coef(i)) <= weight_tol) continue;
    const Complex hv = h(es.values(i));
    if (!std::isfinite(hv.real()) || !std::isfinite(hv.imag())) {
      throw EvaluationError("apply_function: h undefined at lambda = " +
                            std::to_string(es.values(i)) + " with weight " +
                            std::to_string(std::norm(coef(i))));
    }
    out += (hv * coef(i)) * es.vectors.col(i);
  }
  return out;
}

}  // namespace detail

/// h(A)g = sum_i h(lambda_i) <v_i,g> v_i. Eigencomponents with weight at
/// most 1e-12 ||g||^2 are skipped, so h need only be defined on the
/// support of mu_g.
inline HVector apply_function(const Operator& op, const HVector& g, const SpectralFunction& h) {
  require_same_space(op.space(), g.space(), "apply_function");
  const Eigensystem es = hermitian_eigensystem(op);
  return {op.space(),
          detail::apply_function(es, g.coords(), h, 1e-12 * g.coords().squaredNorm())};
}

struct IsometryResult {
  double discrepancy = 0.0;  // max | ||h(A)g|| - ||h||_{L^2(mu_g)} |
  double scale = 0.0;        // max over trials of sum_k |c_k| rho^k ||g||
};

inline double horner(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

/// Random real polynomials (coefficients uniform in [-1,1], degree <= degree_max):
/// ||h(A)g|| from repeated application of A, the L^2(mu_g) norm from atoms.
inline IsometryResult isometry_check(const Operator& op, const HVector& g, int degree_max,
                                     int trials, std::uint64_t seed = 7) {
  const SpectralMeasure mu = spectral_measure(op, g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> degree(0, degree_max);
  double rho = 0.0;
  for (const auto& a : mu.atoms) rho = std::max(rho, std::abs(a.lambda));
  IsometryResult out;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> c(static_cast<size_t>(degree(rng)) + 1);
    for (auto& ci : c) ci = coeff(rng);
    // h(A)g by Horner on vectors
    Vector hv = c.back() * g.coords();
    for (auto it = c.rbegin() + 1; it != c.rend(); ++it) hv = op.apply(hv) + *it * g.coords();
    double l2 = 0.0;
    for (const auto& a : mu.atoms) {
      const double h = horner(c, a.lambda);
      l2 += a.weight * h * h;
    }
    out.discrepancy = std::max(out.discrepancy, std::abs(hv.norm() - std::sqrt(l2)));
    double s = 0.0;
    double p = 1.0;
    for (double ci : c) {
      s += std::abs(ci) * p;
      p *= rho;
    }
    out.scale = std::max(out.scale, s * g.norm());
  }
  return out;
}

/// f = A^{-1} g on the support of mu_g (h(lambda) = 1/lambda). Fails when an
/// atom of significant weight sits at numerical zero.
inline HVector krylov_solution_via_spectrum(const Operator& op, const HVector& g) {
  require_same_space(op.space(), g.space(), "krylov_solution_via_spectrum");
  const Eigensystem es = hermitian_eigensystem(op);
  const Index n = es.values.size();
  const double spread = std::max(es.values(n - 1) - es.values(0),
                                 std::max(std::abs(es.values(0)), std::abs(es.values(n - 1))));
  const double g2 = g.coords().squaredNorm();
  const Vector coef = es.vectors.adjoint() * g.coords();
  for (Index i = 0; i < n; ++i) {
    if (std::norm(coef(i)) > 1e-12 * g2 && std::abs(es.values(i)) <= 1e-10 * spread) {
      throw NotInRangeError("krylov_solution_via_spectrum: atom at lambda = " +
                            std::to_string(es.values(i)) + " carries weight " +
                            std::to_string(std::norm(coef(i))));
    }
  }
  auto reciprocal = [](double lam) { return Complex(1.0 / lam, 0.0); };
  return {op.space(), detail::apply_function(es, g.coords(), reciprocal, 1e-12 * g2)};
}

/// CSV with header "lambda,weight".
inline void write_measure_csv(std::ostream& os, const SpectralMeasure& mu) {
  os.precision(17);
  os << "lambda,weight\n";
  for (const auto& a : mu.atoms) os << a.lambda << ',' << a.weight << '\n';
}

}  // namespace krylovlab
