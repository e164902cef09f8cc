#pragma once

// Krylov subspaces K_N(A,g) and the structural diagnostics built on them:
// distance to the subspace, Krylov intersection (principal angles between
// A(K^perp) and K), reducibility defects, escape indicator and the
// graph-norm (core condition) decay series.
//
// Everything here is finite-scale evidence about truncations; none of it
// certifies a property of the infinite-dimensional operator.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "krylovlab/linop.hpp"

namespace krylovlab {

enum class ReorthPolicy { full_two_pass };

struct KrylovOptions {
  /// Breakdown when the new direction falls below this times the running
  /// max of ||A q_j||.
  double breakdown_tol = 1e-13;
};

/// Orthonormal basis Q of K_N(A,g), columns in generation order.
struct KrylovBasis {
  SpaceId space;
  Matrix q;
  Index requested_order = 0;
  std::optional<Index> breakdown_at;
  ReorthPolicy reorth = ReorthPolicy::full_two_pass;
  double scale = 0.0;

  Index size() const noexcept { return q.cols(); }

  /// Basis of K_n, n clamped to the available columns (K_n = K_breakdown past breakdown).
  KrylovBasis leading(Index n) const {
    KrylovBasis out = *this;
    const Index k = std::clamp<Index>(n, 0, size());
    out.q = q.leftCols(k);
    out.requested_order = n;
    if (breakdown_at && n < *breakdown_at) out.breakdown_at.reset();
    return out;
  }
};

/// Arnoldi with two-pass modified Gram-Schmidt. Each new direction is A
/// applied to the previous orthonormal vector, never a raw power A^k g.
inline KrylovBasis build_krylov_basis(const Operator& op, const HVector& g, Index order,
                                      const KrylovOptions& opts = {}) {
  require_same_space(op.space(), g.space(), "build_krylov_basis");
  if (order < 1) throw ParameterError("build_krylov_basis: order must be at least 1");
  const double gnorm = g.norm();
  if (gnorm == 0.0) throw EmptyBasisError("build_krylov_basis: g = 0 spans the empty subspace");

  KrylovBasis basis;
  basis.space = op.space();
  basis.requested_order = order;
  const Index cap = std::min(order, op.dim());
  Matrix q(op.dim(), cap);
  q.col(0) = g.coords() / gnorm;
  Index k = 1;
  for (; k < order; ++k) {
    Vector w = op.apply(Vector(q.col(k - 1)));
    basis.scale = std::max(basis.scale, w.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k; ++j) {
        w -= q.col(j) * q.col(j).dot(w);
      }
    }
    const double nw = w.norm();
    if (k >= cap || nw == 0.0 || nw <= opts.breakdown_tol * basis.scale) {
      basis.breakdown_at = k;
      break;
    }
    q.col(k) = w * (1.0 / nw);
  }
  basis.q = q.leftCols(std::min(k, cap));
  return basis;
}

namespace detail {

inline Vector project(const Matrix& q, const Vector& f) {
  Vector p = q * (q.adjoint() * f);
  const Vector r = f - p;
  p += q * (q.adjoint() * r);
  return p;
}

inline double residual_norm(const Matrix& q, const Vector& f) {
  if (q.cols() == 0) return f.norm();
  Vector r = f - q * (q.adjoint() * f);
  r -= q * (q.adjoint() * r);
  return r.norm();
}

/// Orthonormal basis of the column span, dropping directions below
/// rel_tol * sigma_max.
inline Matrix orthonormal_range(const Matrix& w, double rel_tol = 1e-12) {
  if (w.cols() == 0) return Matrix(w.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Matrix(w.rows(), 0);
  Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace detail

/// ||f - Q Q^H f||.
inline double distance_to_krylov(const KrylovBasis& basis, const HVector& f) {
  require_same_space(basis.space, f.space(), "distance_to_krylov");
  return detail::residual_norm(basis.q, f.coords());
}

inline HVector project_onto_krylov(const KrylovBasis& basis, const HVector& f) {
  require_same_space(basis.space, f.space(), "project_onto_krylov");
  if (basis.size() == 0) return HVector::zero(f.space());
  return {f.space(), detail::project(basis.q, f.coords())};
}

/// Orthonormal basis of K^perp restricted to coordinates at least
/// `boundary_margin` away from the operator's artificial window edges.
inline Matrix krylov_complement(const Operator& op, const KrylovBasis& basis,
                                Index boundary_margin) {
  require_same_space(op.space(), basis.space, "krylov_complement");
  const std::vector<Index> excluded = op.boundary_indices(boundary_margin);
  std::vector<char> skip(static_cast<size_t>(op.dim()), 0);
  for (Index i : excluded) skip[static_cast<size_t>(i)] = 1;
  std::vector<Index> interior;
  for (Index i = 0; i < op.dim(); ++i) {
    if (!skip[static_cast<size_t>(i)]) interior.push_back(i);
  }
  const Index m = static_cast<Index>(interior.size());
  Matrix out = Matrix::Zero(op.dim(), 0);
  if (m == 0) return out;

  Matrix restricted(m, basis.size());
  for (Index r = 0; r < m; ++r) restricted.row(r) = basis.q.row(interior[static_cast<size_t>(r)]);

  Index rank = 0;
  Matrix full_q = Matrix::Identity(m, m);
  if (basis.size() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(restricted);
    qr.setThreshold(1e-10);
    rank = qr.rank();
    full_q = qr.householderQ() * Matrix::Identity(m, m);
  }
  out = Matrix::Zero(op.dim(), m - rank);
  for (Index r = 0; r < m; ++r) {
    out.row(interior[static_cast<size_t>(r)]) = full_q.row(r).tail(m - rank);
  }
  return out;
}

/// Principal angles (ascending) between span(u) and span(v), both with
/// orthonormal columns. Small angles come from sines, large from cosines.
inline std::vector<double> principal_angles(const Matrix& u, const Matrix& v) {
  std::vector<double> angles;
  const Index k = std::min(u.cols(), v.cols());
  if (k == 0) return angles;
  const Matrix c = u.adjoint() * v;
  Eigen::BDCSVD<Matrix> cos_svd(c);
  const RealVector cosines = cos_svd.singularValues();  // descending
  Matrix s = v - u * c;
  s -= u * (u.adjoint() * s);
  Eigen::BDCSVD<Matrix> sin_svd(s);
  RealVector sines = sin_svd.singularValues();
  std::vector<double> sin_sorted(sines.data(), sines.data() + sines.size());
  std::sort(sin_sorted.begin(), sin_sorted.end());
  for (Index i = 0; i < k; ++i) {
    const double cs = std::min(1.0, cosines(i));
    if (cs * cs >= 0.5 && i < static_cast<Index>(sin_sorted.size())) {
      angles.push_back(std::asin(std::min(1.0, sin_sorted[static_cast<size_t>(i)])));
    } else {
      angles.push_back(std::acos(cs));
    }
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

struct IntersectionOptions {
  double tol = 1e-8;
  Index boundary_margin = 8;
  /// For domain-extension operators add the K^perp element t + x0 with
  /// t = -P_K x0 to the probed set.
  bool include_extension_direction = true;
};

struct IntersectionResult {
  Index dim = 0;
  std::vector<double> angles;
  std::vector<double> cosines;
  std::vector<std::string> notes;
};

/// dim of span(Q) intersected with A(K^perp), counted as principal angles
/// with cos >= 1 - tol.
inline IntersectionResult krylov_intersection(const Operator& op, const KrylovBasis& basis,
                                              const IntersectionOptions& opts = {}) {
  IntersectionResult out;
  const Matrix u = krylov_complement(op, basis, opts.boundary_margin);
  Matrix w = op.apply(u);
  if (const auto* ext = op.extension(); ext && opts.include_extension_direction) {
    const Vector p = detail::project(basis.q, ext->special);
    const Vector resid = ext->special - p;
    if (resid.norm() > 1e-8 * ext->special.norm()) {
      w.conservativeResize(Eigen::NoChange, w.cols() + 1);
      w.col(w.cols() - 1) = ext->image - ext->base->apply(p);
      out.notes.emplace_back("probed set includes the extension element x0 - P_K x0");
    } else {
      out.notes.emplace_back("x0 numerically inside K_N; extension direction omitted");
    }
  }
  if (u.cols() == 0 && w.cols() == 0) {
    out.notes.emplace_back("K^perp is empty within the truncation");
    return out;
  }
  const Matrix w_orth = detail::orthonormal_range(w);
  if (w_orth.cols() == 0) {
    out.notes.emplace_back("A annihilates K^perp within the truncation");
    return out;
  }
  out.angles = principal_angles(basis.q, w_orth);
  for (double a : out.angles) {
    const double c = std::cos(a);
    out.cosines.push_back(c);
    if (c >= 1.0 - opts.tol) ++out.dim;
  }
  return out;
}

struct ReducibilityDefects {
  double d1 = 0.0;  // ||(1-P) A P||
  double d2 = 0.0;  // ||P A (1-P)||
  bool reduced(double tol) const { return d1 <= tol && d2 <= tol; }
};

/// Largest singular values of the off-diagonal blocks of A in the
/// K + K^perp splitting. The K^perp block uses the same boundary
/// restriction as krylov_intersection and only mu = 0 elements.
inline ReducibilityDefects reducibility_defects(const Operator& op, const KrylovBasis& basis,
                                                Index boundary_margin = 8) {
  require_same_space(op.space(), basis.space, "reducibility_defects");
  ReducibilityDefects out;
  if (basis.size() == 0) return out;
  Matrix aq = op.apply(basis.q);
  aq -= basis.q * (basis.q.adjoint() * aq);
  aq -= basis.q * (basis.q.adjoint() * aq);
  out.d1 = detail::spectral_norm(aq);
  const Matrix u = krylov_complement(op, basis, boundary_margin);
  if (u.cols() > 0) out.d2 = detail::spectral_norm(basis.q.adjoint() * op.apply(u));
  return out;
}

struct EscapeResult {
  double indicator = 0.0;            // ||(1-P_K) A x||
  double membership_distance = 0.0;  // dist(x, K_N)
  bool inconclusive = false;
  std::string note;
};

/// Escape indicator for a candidate x in K-bar intersected with D(A).
/// Membership of x is recorded alongside; when it exceeds
/// `membership_threshold` the result is flagged inconclusive.
inline EscapeResult escape_indicator(const Operator& op, const KrylovBasis& basis,
                                     const DomainElement& x, double membership_threshold = 1e-6) {
  require_same_space(op.space(), basis.space, "escape_indicator");
  EscapeResult out;
  out.membership_distance = distance_to_krylov(basis, embed(op, x));
  out.indicator = distance_to_krylov(basis, apply(op, x));
  if (out.membership_distance > membership_threshold) {
    out.inconclusive = true;
    out.note = out.indicator <= membership_threshold
                   ? "small indicator but candidate not established in K_N"
                   : "candidate not established in K_N";
  }
  return out;
}

struct SeriesPoint {
  Index n = 0;
  double value = 0.0;
};

struct CoreDecay {
  std::vector<SeriesPoint> series;
  std::vector<std::string> warnings;
};

/// min over v in K_N of (||x - v||^2 + ||A(x - v)||^2)^{1/2} for each N,
/// solved as least squares on the stacked system [Q; AQ].
inline CoreDecay core_condition_decay(const Operator& op, const HVector& g,
                                      const DomainElement& x, std::vector<Index> orders,
                                      const KrylovOptions& kopts = {}) {
  CoreDecay out;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (orders.empty()) return out;
  if (orders.front() < 1) throw ParameterError("core_condition_decay: orders must be >= 1");
  const KrylovBasis full = build_krylov_basis(op, g, orders.back(), kopts);
  const Matrix aq_full = op.apply(full.q);
  const Index m = op.dim();
  Vector rhs(2 * m);
  rhs.head(m) = embed(op, x).coords();
  rhs.tail(m) = apply(op, x).coords();
  for (Index n : orders) {
    const Index k = std::min(n, full.size());
    Matrix stacked(2 * m, k);
    stacked.topRows(m) = full.q.leftCols(k);
    stacked.bottomRows(m) = aq_full.leftCols(k);
    Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    Vector coeff;
    if (s(s.size() - 1) < 1e-12 * s(0)) {
      const double lambda = 1e-12 * s(0);
      const Vector utb = svd.matrixU().adjoint() * rhs;
      Vector scaled(s.size());
      for (Index i = 0; i < s.size(); ++i) scaled(i) = utb(i) * s(i) / (s(i) * s(i) + lambda * lambda);
      coeff = svd.matrixV() * scaled;
      out.warnings.push_back("N=" + std::to_string(n) +
                             ": ill-conditioned stacked system, Tikhonov-regularized solve");
    } else {
      coeff = svd.solve(rhs);
    }
    out.series.push_back({n, (rhs - stacked * coeff).norm()});
  }
  return out;
}

struct DiagnoseOptions {
  std::vector<Index> orders{5, 10, 20};
  double tol = 1e-8;
  Index boundary_margin = 8;
  double membership_threshold = 1e-6;
};

struct DiagnoseInputs {
  HVector g;
  std::optional<DomainElement> solution;
  std::optional<DomainElement> escape_candidate;
  std::optional<DomainElement> core_vector;
};

struct DiagnosticsReport {
  std::vector<SeriesPoint> distances;
  Index basis_size = 0;
  std::optional<Index> breakdown_at;
  IntersectionResult intersection;
  ReducibilityDefects reducibility;
  std::optional<EscapeResult> escape;
  std::vector<SeriesPoint> core_decay;
  std::vector<std::string> notes;
};

/// All diagnostics for one (A, g) pair. Structural quantities are evaluated
/// at the largest requested order.
inline DiagnosticsReport diagnose(const Operator& op, const DiagnoseInputs& in,
                                  const DiagnoseOptions& opts = {}) {
  std::vector<Index> orders = opts.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (orders.empty() || orders.front() < 1) {
    throw ParameterError("diagnose: orders must be a nonempty list of positive integers");
  }
  DiagnosticsReport rep;
  const KrylovBasis basis = build_krylov_basis(op, in.g, orders.back());
  rep.basis_size = basis.size();
  rep.breakdown_at = basis.breakdown_at;
  if (in.solution) {
    const HVector f = embed(op, *in.solution);
    for (Index n : orders) rep.distances.push_back({n, distance_to_krylov(basis.leading(n), f)});
  }
  rep.intersection =
      krylov_intersection(op, basis, {opts.tol, opts.boundary_margin, /*extension=*/true});
  rep.reducibility = reducibility_defects(op, basis, opts.boundary_margin);
  if (in.escape_candidate) {
    rep.escape = escape_indicator(op, basis, *in.escape_candidate, opts.membership_threshold);
  }
  if (in.core_vector) {
    CoreDecay cd = core_condition_decay(op, in.g, *in.core_vector, orders);
    rep.core_decay = std::move(cd.series);
    for (auto& w : cd.warnings) rep.notes.push_back(std::move(w));
  }
  for (auto& n : rep.intersection.notes) rep.notes.push_back(n);
  rep.notes.emplace_back("finite-scale evidence only: truncation M=" + std::to_string(op.dim()));
  rep.notes.emplace_back("assumption P_K f in D(A) is not testable at finite truncation");
  return rep;
}

}  // namespace krylovlab
