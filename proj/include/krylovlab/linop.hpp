#pragma once

// Vectors and operators on truncated Hilbert spaces.
//
// Every space is a finite window of an orthonormal basis, so coordinates
// are plain complex arrays and inner products are Euclidean. Operators are
// one of a small closed set of kinds; the domain-extension kind models an
// operator whose domain is D(T) + span{x0} with a prescribed image for x0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "krylovlab/errors.hpp"

namespace krylovlab {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Identifies a truncation: basis family plus window dimension.
struct SpaceId {
  std::string family;
  Index dim = 0;

  friend bool operator==(const SpaceId&, const SpaceId&) = default;
};

inline std::string to_string(const SpaceId& s) {
  std::ostringstream os;
  os << s.family << '[' << s.dim << ']';
  return os.str();
}

inline void require_same_space(const SpaceId& a, const SpaceId& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": space mismatch " + to_string(a) + " vs " +
                         to_string(b));
  }
}

/// Coordinate vector over a declared orthonormal basis.
class HVector {
 public:
  HVector() = default;

  HVector(SpaceId space, Vector coords) : space_(std::move(space)), coords_(std::move(coords)) {
    if (coords_.size() != space_.dim) {
      throw DimensionError("HVector: " + std::to_string(coords_.size()) +
                           " coordinates for space " + to_string(space_));
    }
    if (!coords_.allFinite()) {
      throw NumericalError("HVector: non-finite coordinate in space " + to_string(space_));
    }
  }

  static HVector zero(const SpaceId& space) { return {space, Vector::Zero(space.dim)}; }

  static HVector unit(const SpaceId& space, Index n) {
    if (n < 0 || n >= space.dim) {
      throw DimensionError("HVector::unit: index " + std::to_string(n) + " outside " +
                           to_string(space));
    }
    Vector v = Vector::Zero(space.dim);
    v(n) = 1.0;
    return {space, std::move(v)};
  }

  const Vector& coords() const noexcept { return coords_; }
  const SpaceId& space() const noexcept { return space_; }
  Index dim() const noexcept { return coords_.size(); }
  double norm() const { return coords_.norm(); }

  HVector& operator+=(const HVector& o) {
    require_same_space(space_, o.space_, "HVector::operator+=");
    coords_ += o.coords_;
    return *this;
  }
  HVector& operator-=(const HVector& o) {
    require_same_space(space_, o.space_, "HVector::operator-=");
    coords_ -= o.coords_;
    return *this;
  }
  HVector& operator*=(Complex s) {
    coords_ *= s;
    return *this;
  }

  friend HVector operator+(HVector a, const HVector& b) { return a += b; }
  friend HVector operator-(HVector a, const HVector& b) { return a -= b; }
  friend HVector operator*(Complex s, HVector a) { return a *= s; }

 private:
  SpaceId space_;
  Vector coords_;
};

/// Inner product, conjugate-linear in the first argument.
inline Complex inner(const HVector& u, const HVector& v) {
  require_same_space(u.space(), v.space(), "inner");
  return u.coords().dot(v.coords());
}

/// Element t + mu*x0 of a domain-extension domain. Plain operators see mu = 0.
struct DomainElement {
  HVector t;
  Complex mu{0.0, 0.0};

  DomainElement() = default;
  DomainElement(HVector t_in, Complex mu_in = {}) : t(std::move(t_in)), mu(mu_in) {}  // NOLINT
};

// ---------------------------------------------------------------------------
// Operator kinds

struct DenseKind {
  Matrix matrix;
};

/// A e_n = w_n e_{n+offset}; images leaving the window are dropped.
struct WeightedShiftKind {
  Index offset = 1;
  Vector weights;
};

struct DiagonalKind {
  Vector entries;
};

/// Integral operator discretized on quadrature nodes; `matrix` acts on
/// coordinates sqrt(w_j) f(x_j).
struct QuadratureIntegralKind {
  Matrix matrix;
  RealVector nodes;
  RealVector weights;
};

class Operator;

/// D(A) = D(T) + span{special}, A special := image, A t := T t.
struct DomainExtensionKind {
  std::shared_ptr<const Operator> base;
  Vector special;
  Vector image;
};

/// Which window edges are artificial (truncation of an infinite shift).
enum class WindowEdges { none, trailing, both };

class Operator {
 public:
  using Kind = std::variant<DenseKind, WeightedShiftKind, DiagonalKind, QuadratureIntegralKind,
                            DomainExtensionKind>;

  Operator(std::string name, SpaceId space, Kind kind, WindowEdges edges = WindowEdges::none)
      : name_(std::move(name)), space_(std::move(space)), kind_(std::move(kind)), edges_(edges) {
    validate();
  }

  const std::string& name() const noexcept { return name_; }
  const SpaceId& space() const noexcept { return space_; }
  Index dim() const noexcept { return space_.dim; }
  const Kind& kind() const noexcept { return kind_; }
  WindowEdges edges() const noexcept { return edges_; }

  bool is_domain_extension() const noexcept {
    return std::holds_alternative<DomainExtensionKind>(kind_);
  }
  const DomainExtensionKind* extension() const noexcept {
    return std::get_if<DomainExtensionKind>(&kind_);
  }

  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DenseKind>) return "dense";
          else if constexpr (std::is_same_v<K, WeightedShiftKind>) return "weighted-shift";
          else if constexpr (std::is_same_v<K, DiagonalKind>) return "diagonal";
          else if constexpr (std::is_same_v<K, QuadratureIntegralKind>) return "quadrature-integral";
          else return "domain-extension";
        },
        kind_);
  }

  /// Coordinate action on the mu = 0 part of the domain.
  Vector apply(const Vector& v) const {
    check_size(v, "apply");
    return std::visit(
        [&](const auto& k) -> Vector {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DenseKind> || std::is_same_v<K, QuadratureIntegralKind>) {
            return k.matrix * v;
          } else if constexpr (std::is_same_v<K, DiagonalKind>) {
            return k.entries.cwiseProduct(v);
          } else if constexpr (std::is_same_v<K, WeightedShiftKind>) {
            Vector out = Vector::Zero(dim());
            for (Index n = 0; n < dim(); ++n) {
              const Index m = n + k.offset;
              if (m >= 0 && m < dim()) out(m) += k.weights(n) * v(n);
            }
            return out;
          } else {
            return k.base->apply(v);
          }
        },
        kind_);
  }

  Vector apply_adjoint(const Vector& v) const {
    check_size(v, "apply_adjoint");
    return std::visit(
        [&](const auto& k) -> Vector {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DenseKind> || std::is_same_v<K, QuadratureIntegralKind>) {
            return k.matrix.adjoint() * v;
          } else if constexpr (std::is_same_v<K, DiagonalKind>) {
            return k.entries.conjugate().cwiseProduct(v);
          } else if constexpr (std::is_same_v<K, WeightedShiftKind>) {
            Vector out = Vector::Zero(dim());
            for (Index n = 0; n < dim(); ++n) {
              const Index m = n + k.offset;
              if (m >= 0 && m < dim()) out(n) = std::conj(k.weights(n)) * v(m);
            }
            return out;
          } else {
            throw UnsupportedOperation("apply_adjoint: adjoint of domain-extension operator '" +
                                       name_ + "' is not representable in extension coordinates");
          }
        },
        kind_);
  }

  /// Column-wise action on a block of coordinate vectors.
  Matrix apply(const Matrix& block) const {
    if (block.rows() != dim()) {
      throw DimensionError("apply: block with " + std::to_string(block.rows()) +
                           " rows for operator '" + name_ + "' on " + to_string(space_));
    }
    if (const auto* d = std::get_if<DenseKind>(&kind_)) return d->matrix * block;
    if (const auto* q = std::get_if<QuadratureIntegralKind>(&kind_)) return q->matrix * block;
    Matrix out(block.rows(), block.cols());
    for (Index j = 0; j < block.cols(); ++j) out.col(j) = apply(Vector(block.col(j)));
    return out;
  }

  /// Dense matrix of the mu = 0 action.
  Matrix dense() const {
    return std::visit(
        [&](const auto& k) -> Matrix {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DenseKind> || std::is_same_v<K, QuadratureIntegralKind>) {
            return k.matrix;
          } else if constexpr (std::is_same_v<K, DiagonalKind>) {
            return k.entries.asDiagonal();
          } else if constexpr (std::is_same_v<K, WeightedShiftKind>) {
            Matrix a = Matrix::Zero(dim(), dim());
            for (Index n = 0; n < dim(); ++n) {
              const Index m = n + k.offset;
              if (m >= 0 && m < dim()) a(m, n) = k.weights(n);
            }
            return a;
          } else {
            return k.base->dense();
          }
        },
        kind_);
  }

  /// Coordinates within `margin` of an artificial window edge.
  std::vector<Index> boundary_indices(Index margin) const {
    std::vector<Index> out;
    if (edges_ == WindowEdges::none || margin <= 0) return out;
    const Index m = std::min(margin, dim());
    if (edges_ == WindowEdges::both) {
      for (Index i = 0; i < m; ++i) out.push_back(i);
    }
    for (Index i = std::max(dim() - m, edges_ == WindowEdges::both ? m : Index{0}); i < dim(); ++i) {
      out.push_back(i);
    }
    return out;
  }

 private:
  void check_size(const Vector& v, const char* what) const {
    if (v.size() != dim()) {
      throw DimensionError(std::string(what) + ": vector of size " + std::to_string(v.size()) +
                           " for operator '" + name_ + "' on " + to_string(space_));
    }
  }

  void validate() const {
    if (space_.dim <= 0) throw ParameterError("Operator '" + name_ + "': empty space");
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DenseKind> || std::is_same_v<K, QuadratureIntegralKind>) {
            if (k.matrix.rows() != dim() || k.matrix.cols() != dim())
              throw DimensionError("Operator '" + name_ + "': matrix shape mismatch");
            if constexpr (std::is_same_v<K, QuadratureIntegralKind>) {
              if (k.nodes.size() != dim() || k.weights.size() != dim())
                throw DimensionError("Operator '" + name_ + "': quadrature size mismatch");
            }
          } else if constexpr (std::is_same_v<K, DiagonalKind>) {
            if (k.entries.size() != dim())
              throw DimensionError("Operator '" + name_ + "': diagonal size mismatch");
          } else if constexpr (std::is_same_v<K, WeightedShiftKind>) {
            if (k.weights.size() != dim())
              throw DimensionError("Operator '" + name_ + "': weight sequence size mismatch");
          } else {
            if (!k.base) throw ParameterError("Operator '" + name_ + "': missing base operator");
            require_same_space(k.base->space(), space_, "domain-extension base");
            if (k.special.size() != dim() || k.image.size() != dim())
              throw DimensionError("Operator '" + name_ + "': extension vector size mismatch");
          }
        },
        kind_);
  }

  std::string name_;
  SpaceId space_;
  Kind kind_;
  WindowEdges edges_;
};

// ---------------------------------------------------------------------------
// Constructors

inline Operator dense_operator(std::string name, SpaceId space, Matrix m) {
  return {std::move(name), std::move(space), DenseKind{std::move(m)}};
}

inline Operator diagonal_operator(std::string name, SpaceId space, Vector d) {
  return {std::move(name), std::move(space), DiagonalKind{std::move(d)}};
}

inline Operator weighted_shift_operator(std::string name, SpaceId space, Index offset, Vector w,
                                        WindowEdges edges) {
  return {std::move(name), std::move(space), WeightedShiftKind{offset, std::move(w)}, edges};
}

inline Operator domain_extension_operator(std::string name, Operator base, Vector special,
                                          Vector image) {
  SpaceId space = base.space();
  WindowEdges edges = base.edges();
  return {std::move(name), std::move(space),
          DomainExtensionKind{std::make_shared<const Operator>(std::move(base)), std::move(special),
                              std::move(image)},
          edges};
}

// ---------------------------------------------------------------------------
// Operations

/// The HVector t + mu*x0 represented by a domain element.
inline HVector embed(const Operator& op, const DomainElement& x) {
  require_same_space(op.space(), x.t.space(), "embed");
  if (x.mu == Complex{}) return x.t;
  const auto* ext = op.extension();
  if (ext == nullptr) {
    throw UnsupportedOperation("embed: operator '" + op.name() +
                               "' has no special vector; mu must be zero");
  }
  return {op.space(), x.t.coords() + x.mu * ext->special};
}

inline HVector apply(const Operator& op, const DomainElement& x) {
  require_same_space(op.space(), x.t.space(), "apply");
  Vector out = op.apply(x.t.coords());
  if (x.mu != Complex{}) {
    const auto* ext = op.extension();
    if (ext == nullptr) {
      throw UnsupportedOperation("apply: operator '" + op.name() +
                                 "' has no special vector; mu must be zero");
    }
    out += x.mu * ext->image;
  }
  return {op.space(), std::move(out)};
}

inline HVector apply_adjoint(const Operator& op, const HVector& v) {
  require_same_space(op.space(), v.space(), "apply_adjoint");
  return {op.space(), op.apply_adjoint(v.coords())};
}

/// (||x||^2 + ||Ax||^2)^{1/2}.
inline double graph_norm(const Operator& op, const DomainElement& x) {
  const double a = embed(op, x).norm();
  const double b = apply(op, x).norm();
  return std::hypot(a, b);
}

inline Vector random_coords(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

inline HVector random_hvector(const SpaceId& space, std::mt19937_64& rng) {
  return {space, random_coords(space.dim, rng)};
}

/// Largest singular value of the mu = 0 action. Exact for diagonal and
/// shift kinds, power iteration on A^H A otherwise.
inline double norm_estimate(const Operator& op) {
  if (const auto* d = std::get_if<DiagonalKind>(&op.kind())) {
    return d->entries.cwiseAbs().maxCoeff();
  }
  if (const auto* s = std::get_if<WeightedShiftKind>(&op.kind())) {
    double m = 0.0;
    for (Index n = 0; n < op.dim(); ++n) {
      const Index t = n + s->offset;
      if (t >= 0 && t < op.dim()) m = std::max(m, std::abs(s->weights(n)));
    }
    return m;
  }
  const Matrix a = op.dense();
  if (a.rows() <= 400) {
    return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  }
  std::mt19937_64 rng(0x5eed);
  Vector v = random_coords(a.cols(), rng);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = a.adjoint() * (a * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = std::sqrt(nw);
    v = w * (1.0 / nw);
    if (std::abs(next - sigma) <= 1e-12 * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

/// max |<Au,v> - <u,A*v>| / (||u|| ||v|| ||A||) over random pairs. For
/// domain-extension operators the base operator is probed.
inline double adjoint_consistency_defect(const Operator& op, std::mt19937_64& rng, int trials) {
  const Operator* probe = &op;
  if (const auto* ext = op.extension()) probe = ext->base.get();
  const double scale = std::max(norm_estimate(*probe), 1e-300);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector u = random_coords(op.dim(), rng);
    const Vector v = random_coords(op.dim(), rng);
    const Complex lhs = v.dot(probe->apply(u));
    const Complex rhs = probe->apply_adjoint(v).dot(u);
    worst = std::max(worst, std::abs(lhs - rhs) / (u.norm() * v.norm() * scale));
  }
  return worst;
}

/// ||A - sign*A^H|| / ||A|| (Frobenius), with sign = +1 for Hermitian and
/// -1 for skew-Hermitian structure. Throws UnsupportedOperation for
/// domain-extension operators.
inline double structure_defect(const Operator& op, double sign) {
  if (op.is_domain_extension()) {
    throw UnsupportedOperation("structure check: domain-extension operator '" + op.name() +
                               "' has no representable adjoint");
  }
  if (const auto* d = std::get_if<DiagonalKind>(&op.kind())) {
    const double scale = d->entries.norm();
    if (scale == 0.0) return 0.0;
    return (d->entries - sign * d->entries.conjugate()).norm() / scale;
  }
  if (op.dim() <= 2048) {
    const Matrix a = op.dense();
    const double scale = a.norm();
    if (scale == 0.0) return 0.0;
    return (a - sign * a.adjoint()).norm() / scale;
  }
  std::mt19937_64 rng(0xab1e);
  double worst = 0.0;
  for (int t = 0; t < 16; ++t) {
    const Vector u = random_coords(op.dim(), rng);
    const Vector au = op.apply(u);
    const double scale = std::max(au.norm(), 1e-300);
    worst = std::max(worst, (au - sign * op.apply_adjoint(u)).norm() / scale);
  }
  return worst;
}

inline bool is_hermitian(const Operator& op, double tol = 1e-10) {
  return structure_defect(op, 1.0) <= tol;
}

inline bool is_skew_hermitian(const Operator& op, double tol = 1e-10) {
  return structure_defect(op, -1.0) <= tol;
}

}  // namespace krylovlab
