#pragma once

// Conjugate gradients from the zero vector, and the self-/skew-adjoint
// drivers that solve Af = g through A^2 f = Ag (resp. -A^2 f = -Ag).
//
// The start vector is always zero and cannot be configured: iterates then
// stay in K_N(A,g), and on a consistent PSD system the limit is the
// minimal-norm solution.

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "krylovlab/linop.hpp"

namespace krylovlab {

enum class SolveMethod { cg_psd, selfadjoint_square, skewadjoint_square };

inline std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::cg_psd: return "cg-psd";
    case SolveMethod::selfadjoint_square: return "selfadjoint-square";
    case SolveMethod::skewadjoint_square: return "skewadjoint-square";
  }
  return "unknown";
}

inline std::optional<SolveMethod> parse_solve_method(const std::string& s) {
  if (s == "cg-psd") return SolveMethod::cg_psd;
  if (s == "selfadjoint-square") return SolveMethod::selfadjoint_square;
  if (s == "skewadjoint-square") return SolveMethod::skewadjoint_square;
  return std::nullopt;
}

struct CgOptions {
  Index max_iter = 1000;
  double rtol = 1e-10;
  bool keep_iterates = false;
  /// Enables the energy-error series.
  std::optional<HVector> known_solution;
};

struct SolveReport {
  HVector solution;
  std::vector<HVector> iterates;        // f_1, f_2, ... when kept
  std::vector<double> residual_norms;   // ||g - A f_N||, N = 0, 1, ...
  std::vector<double> energy_errors;    // <e_N, B e_N>, B the CG operator
  Index iterations = 0;
  bool converged = false;
  SolveMethod method = SolveMethod::cg_psd;
  double final_mismatch = 0.0;          // ||A f - g||
  std::string note;
};

namespace detail {

/// Hermitian positive semidefinite test on seeded random probes.
inline void require_psd(const Operator& op) {
  if (structure_defect(op, 1.0) > 1e-10) {
    throw WrongClassError("cg_solve: operator '" + op.name() + "' is not Hermitian");
  }
  std::mt19937_64 rng(0xc0ffee);
  for (int t = 0; t < 8; ++t) {
    const Vector v = random_coords(op.dim(), rng);
    const Vector av = op.apply(v);
    const double q = v.dot(av).real();
    if (q < -1e-10 * v.norm() * av.norm()) {
      throw IndefiniteOperatorError("cg_solve: operator '" + op.name() +
                                    "' is indefinite; use the selfadjoint-square driver");
    }
  }
}

/// CG on B x = b from x = 0. `step(p)` returns {B p, A p}; the original
/// residual g - A x is tracked through A p and used for stopping.
template <class Step>
SolveReport run_cg(const Operator& op, const HVector& g, const Vector& b, Step&& step,
                   SolveMethod method, const CgOptions& opts) {
  SolveReport rep;
  rep.method = method;
  const Index m = op.dim();
  const double gnorm = g.norm();
  Vector x = Vector::Zero(m);
  Vector r = b;
  Vector orig = g.coords();
  Vector p = r;
  double rr = r.squaredNorm();

  std::optional<Vector> fstar;
  if (opts.known_solution) {
    require_same_space(op.space(), opts.known_solution->space(), "cg known_solution");
    fstar = opts.known_solution->coords();
  }
  auto energy = [&](const Vector& xk) {
    const Vector e = xk - *fstar;
    return e.dot(step(e).first).real();
  };

  rep.residual_norms.push_back(orig.norm());
  if (fstar) rep.energy_errors.push_back(energy(x));
  const double target = opts.rtol * gnorm;
  if (orig.norm() <= target) {
    rep.converged = true;
  }
  const double b0 = b.norm();
  for (Index it = 1; !rep.converged && it <= opts.max_iter; ++it) {
    auto [bp, ap] = step(p);
    const double curv = p.dot(bp).real();
    const double pscale = p.norm() * bp.norm();
    if (curv < -1e-10 * pscale) {
      throw IndefiniteOperatorError(
          "cg: negative curvature <p,Bp> = " + std::to_string(curv) + " at iteration " +
          std::to_string(it) + "; the operator is indefinite, use the selfadjoint-square driver");
    }
    if (curv <= 1e-300 || curv <= 1e-14 * pscale) {
      rep.note = "curvature vanished before the residual target was met";
      break;
    }
    const Complex alpha = rr / curv;
    x += alpha * p;
    r -= alpha * bp;
    orig -= alpha * ap;
    rep.iterations = it;
    double res = orig.norm();
    if (res <= target) {
      // confirm against the explicit residual
      orig = g.coords() - op.apply(x);
      res = orig.norm();
    }
    rep.residual_norms.push_back(res);
    if (fstar) rep.energy_errors.push_back(energy(x));
    if (opts.keep_iterates) rep.iterates.emplace_back(op.space(), x);
    if (res <= target) {
      rep.converged = true;
      break;
    }
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= 1e-15 * b0) {
      rep.note = "CG residual at machine precision; original equation residual above target";
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (!rep.converged && rep.note.empty()) rep.note = "iteration limit reached";
  rep.solution = HVector(op.space(), x);
  rep.final_mismatch = (op.apply(x) - g.coords()).norm();
  return rep;
}

}  // namespace detail

/// Plain CG for Hermitian positive semidefinite A, zero start.
inline SolveReport cg_solve(const Operator& op, const HVector& g, const CgOptions& opts = {}) {
  require_same_space(op.space(), g.space(), "cg_solve");
  detail::require_psd(op);
  auto step = [&](const Vector& p) {
    Vector ap = op.apply(p);
    return std::pair<Vector, Vector>{ap, ap};
  };
  return detail::run_cg(op, g, g.coords(), step, SolveMethod::cg_psd, opts);
}

/// Self-adjoint A, possibly indefinite or singular: CG on A^2 f = A g.
inline SolveReport solve_selfadjoint(const Operator& op, const HVector& g,
                                     const CgOptions& opts = {}) {
  require_same_space(op.space(), g.space(), "solve_selfadjoint");
  const double defect = structure_defect(op, 1.0);
  if (defect > 1e-10) {
    throw WrongClassError("solve_selfadjoint: operator '" + op.name() +
                          "' is not self-adjoint (defect " + std::to_string(defect) + ")");
  }
  auto step = [&](const Vector& p) {
    Vector ap = op.apply(p);
    Vector aap = op.apply(ap);
    return std::pair<Vector, Vector>{std::move(aap), std::move(ap)};
  };
  return detail::run_cg(op, g, op.apply(g.coords()), step, SolveMethod::selfadjoint_square, opts);
}

/// Skew-adjoint A: CG on -A^2 f = -A g (-A^2 is PSD).
inline SolveReport solve_skewadjoint(const Operator& op, const HVector& g,
                                     const CgOptions& opts = {}) {
  require_same_space(op.space(), g.space(), "solve_skewadjoint");
  const double defect = structure_defect(op, -1.0);
  if (defect > 1e-10) {
    throw WrongClassError("solve_skewadjoint: operator '" + op.name() +
                          "' is not skew-adjoint (defect " + std::to_string(defect) + ")");
  }
  auto step = [&](const Vector& p) {
    Vector ap = op.apply(p);
    Vector aap = -op.apply(ap);
    return std::pair<Vector, Vector>{std::move(aap), std::move(ap)};
  };
  return detail::run_cg(op, g, -op.apply(g.coords()), step, SolveMethod::skewadjoint_square,
                        opts);
}

inline constexpr Index kOracleMaxDim = 2000;

/// Pseudoinverse solution via SVD, singular values below 1e-12 sigma_max cut.
inline HVector minimal_norm_oracle(const Operator& op, const HVector& g) {
  require_same_space(op.space(), g.space(), "minimal_norm_oracle");
  if (op.dim() > kOracleMaxDim) {
    throw OracleUnavailableError("minimal_norm_oracle: dimension " + std::to_string(op.dim()) +
                                 " exceeds " + std::to_string(kOracleMaxDim));
  }
  const Matrix a = op.dense();
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  Vector out = Vector::Zero(op.dim());
  if (s.size() == 0 || s(0) == 0.0) return {op.space(), out};
  const double cut = 1e-12 * s(0);
  const Vector utg = svd.matrixU().adjoint() * g.coords();
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) out += svd.matrixV().col(i) * (utg(i) / s(i));
  }
  return {op.space(), out};
}

/// Max over N = 1..n_small of ||f_N(CG) - argmin_{h in K_N} energy(h)||.
/// The minimizer is brute force on normalized raw power vectors K: least
/// squares min_c ||A^{1/2} K c - A^{+1/2} g||, dense, from an eigendecomposition.
/// Normal equations K^H A K c = K^H g lose all digits by N = 6 at cond(A) ~ 100.
inline double energy_minimality_check(const Operator& op, const HVector& g, Index n_small) {
  if (op.dim() > 10 || n_small > 6 || n_small < 1) {
    throw ParameterError("energy_minimality_check: requires M <= 10 and 1 <= N <= 6");
  }
  CgOptions opts;
  opts.max_iter = n_small;
  opts.rtol = 1e-15;
  opts.keep_iterates = true;
  const SolveReport rep = cg_solve(op, g, opts);
  const Matrix a = op.dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es((0.5 * (a + a.adjoint())).eval());
  const RealVector lam = es.eigenvalues().cwiseMax(0.0);
  const double cut = 1e-12 * lam.maxCoeff();
  RealVector root(lam.size());
  RealVector inv_root(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    root(i) = std::sqrt(lam(i));
    inv_root(i) = lam(i) > cut ? 1.0 / root(i) : 0.0;
  }
  const Matrix& v = es.eigenvectors();
  const Matrix sqrt_a = v * root.cast<Complex>().asDiagonal() * v.adjoint();
  const Vector rhs = v * (inv_root.cast<Complex>().asDiagonal() * (v.adjoint() * g.coords()));
  Matrix powers(op.dim(), n_small);
  Vector p = g.coords();
  for (Index k = 0; k < n_small; ++k) {
    const double pn = p.norm();
    powers.col(k) = pn > 0.0 ? Vector(p * (1.0 / pn)) : p;
    p = a * p;
  }
  double worst = 0.0;
  for (Index n = 1; n <= n_small; ++n) {
    const Matrix kn = powers.leftCols(n);
    const Vector coeff = Eigen::CompleteOrthogonalDecomposition<Matrix>(sqrt_a * kn).solve(rhs);
    const Vector brute = kn * coeff;
    Vector cg_iter = rep.solution.coords();
    if (n <= static_cast<Index>(rep.iterates.size())) cg_iter = rep.iterates[n - 1].coords();
    worst = std::max(worst, (cg_iter - brute).norm());
  }
  return worst;
}

}  // namespace krylovlab
