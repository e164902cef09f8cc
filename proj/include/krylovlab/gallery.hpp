#pragma once

// Worked operator/datum pairs, each bundled with executable facts.
//
// Shift operators are truncated to finite windows; entries shifted past the
// window are dropped. Facts that would otherwise see the artificial edge are
// evaluated away from it (see WindowEdges and boundary_margin).

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "krylovlab/cg.hpp"
#include "krylovlab/krylov.hpp"
#include "krylovlab/linop.hpp"
#include "krylovlab/quadrature.hpp"
#include "krylovlab/spectral.hpp"

namespace krylovlab {

struct FactOutcome {
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct GalleryProblem;

struct Fact {
  std::string id;
  std::string claim;
  std::string source;
  std::function<FactOutcome(const GalleryProblem&)> check;
};

struct GalleryProblem {
  std::string id;
  Operator op;
  HVector g;
  std::optional<DomainElement> known_solution;
  std::map<std::string, DomainElement> vectors;  // named witnesses
  std::vector<Fact> facts;
  Index truncation = 0;
  std::map<std::string, double> params;
  std::string source;
  std::vector<std::string> notes;
};

/// Optional overrides; unset fields take each problem's default.
struct ProblemParams {
  std::optional<Index> M;
  std::optional<int> n_grid;
  std::optional<int> n_quad;
  std::optional<double> decay;
};

inline constexpr Index kDefaultBoundaryMargin = 8;

/// ||A f_known - g|| over coordinates away from artificial window edges.
inline double known_solution_residual(const GalleryProblem& p,
                                      Index margin = kDefaultBoundaryMargin) {
  if (!p.known_solution) return 0.0;
  Vector r = apply(p.op, *p.known_solution).coords() - p.g.coords();
  for (Index i : p.op.boundary_indices(margin)) r(i) = 0.0;
  return r.norm();
}

namespace detail {

inline FactOutcome at_most(double value, double threshold, std::string detail = {}) {
  return {value <= threshold, value, threshold, std::move(detail)};
}

inline Fact residual_fact(std::string source) {
  return {"known-solution-residual", "A f_known = g away from window edges", std::move(source),
          [](const GalleryProblem& p) {
            return at_most(known_solution_residual(p), 1e-8 * std::max(1.0, p.g.norm()));
          }};
}

/// Smallest N in 1..n_max with dist(f, K_N) < threshold, plus whether the
/// series decreased strictly up to that point. Returns 0 if never reached.
struct DensityProbe {
  Index first_below = 0;
  bool strictly_decreasing = true;
  std::vector<double> series;
};

inline DensityProbe density_probe(const Operator& op, const HVector& g, const HVector& f,
                                  Index n_max, double threshold) {
  DensityProbe out;
  const KrylovBasis basis = build_krylov_basis(op, g, n_max);
  for (Index n = 1; n <= n_max; ++n) {
    const double d = distance_to_krylov(basis.leading(n), f);
    if (!out.series.empty() && out.first_below == 0 && !(d < out.series.back())) {
      out.strictly_decreasing = false;
    }
    out.series.push_back(d);
    if (out.first_below == 0 && d < threshold) out.first_below = n;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// M_z on L^2 of the disk |z - 2| < 1, g = 1, f = 1/z. Polar tensor rule:
/// Gauss-Legendre in radius, trapezoid in angle, sqrt(weights) folded in.
inline GalleryProblem multiplication_annulus(int n_grid = 64) {
  if (n_grid < 8) throw ParameterError("multiplication_annulus: n_grid must be >= 8");
  const quadrature::Rule radial = quadrature::gauss_legendre(n_grid, 0.0, 1.0);
  const int n_theta = n_grid;
  const Index m = static_cast<Index>(n_grid) * n_theta;
  Vector z(m);
  Vector sqrt_w(m);
  for (int i = 0; i < n_grid; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / n_theta;
      const double r = radial.nodes(i);
      const double w = radial.weights(i) * r * 2.0 * std::numbers::pi / n_theta;
      z(i * n_theta + j) = Complex(2.0, 0.0) + std::polar(r, theta);
      sqrt_w(i * n_theta + j) = std::sqrt(w);
    }
  }
  const SpaceId space{"L2(disk|z-2|<1)", m};
  GalleryProblem p{"multiplication", diagonal_operator("multiplication-by-z", space, z),
                   HVector(space, sqrt_w), std::nullopt, {}, {}, m, {}, {}, {}};
  p.known_solution = DomainElement(HVector(space, sqrt_w.cwiseQuotient(z)));
  p.params["n_grid"] = n_grid;
  p.source = "multiplication operator example";
  p.facts.push_back({"multiplication-diagonal", "(A g)_j = z_j g_j", p.source,
                     [](const GalleryProblem& q) {
                       const auto& d = std::get<DiagonalKind>(q.op.kind()).entries;
                       const Vector ag = apply(q.op, q.g).coords();
                       return detail::at_most((ag - d.cwiseProduct(q.g.coords())).cwiseAbs().maxCoeff(),
                                              1e-15);
                     }});
  p.facts.push_back({"solution-norm", "||1/z||^2 = pi ln(4/3) (integral of |z|^-2 over the disk)",
                     p.source, [](const GalleryProblem& q) {
                       const double f2 = embed(q.op, *q.known_solution).coords().squaredNorm();
                       return detail::at_most(std::abs(f2 - std::numbers::pi * std::log(4.0 / 3.0)),
                                              1e-10);
                     }});
  p.facts.push_back(
      {"taylor-rate", "dist(f, K_N) decays like 2^-N: log-slope over N=5..25 <= -0.60", p.source,
       [](const GalleryProblem& q) {
         const KrylovBasis b = build_krylov_basis(q.op, q.g, 25);
         const HVector f = embed(q.op, *q.known_solution);
         double sx = 0, sy = 0, sxx = 0, sxy = 0;
         int cnt = 0;
         for (Index n = 5; n <= 25; ++n) {
           const double y = std::log(distance_to_krylov(b.leading(n), f));
           sx += n;
           sy += y;
           sxx += double(n) * n;
           sxy += n * y;
           ++cnt;
         }
         const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
         return detail::at_most(slope, -0.60, "least-squares slope of ln dist");
       }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// Left shift on l^2(N_0), window {0..M-1}; g_n = 1/n!, f_n = 1/(n-1)!.
inline GalleryProblem left_shift_problem(Index m = 128) {
  if (m < 4) throw ParameterError("left_shift_problem: M must be >= 4");
  const SpaceId space{"l2(N0)", m};
  Vector g(m);
  Vector f = Vector::Zero(m);
  g(0) = 1.0;
  for (Index n = 1; n < m; ++n) g(n) = g(n - 1) / static_cast<double>(n);  // no k! formed
  for (Index n = 1; n < m; ++n) f(n) = g(n - 1);
  GalleryProblem p{"left-shift",
                   weighted_shift_operator("left-shift", space, -1, Vector::Ones(m),
                                           WindowEdges::trailing),
                   HVector(space, g), DomainElement(HVector(space, f)), {}, {}, m, {}, {}, {}};
  p.params["M"] = static_cast<double>(m);
  p.source = "left-shift example";
  p.facts.push_back({"datum-norm", "||g||^2 = sum (1/n!)^2 = I_0(2)", p.source,
                     [](const GalleryProblem& q) {
                       const double v = q.g.coords().squaredNorm();
                       if (q.truncation < 20) return FactOutcome{true, v, 0.0, "skipped: M < 20"};
                       return detail::at_most(std::abs(v - std::cyl_bessel_i(0.0, 2.0)), 1e-12);
                     }});
  p.facts.push_back(
      {"e0-approximant", "||3! L^3 g - e_0|| matches sum_{n>=1} (3!/(n+3)!)^2 within 1e-3",
       p.source, [](const GalleryProblem& q) {
         Vector v = q.g.coords();
         for (int k = 0; k < 3; ++k) v = q.op.apply(v);
         v *= 6.0;
         v(0) -= 1.0;
         double series = 0.0;
         double term = 1.0;  // 3!/(n+3)! built incrementally
         for (int n = 1; n < 200; ++n) {
           term /= static_cast<double>(n + 3);
           series += term * term;
         }
         return detail::at_most(std::abs(v.norm() - std::sqrt(series)), 1e-3,
                                "value " + std::to_string(v.norm()));
       }});
  p.facts.push_back({"krylov-density",
                     "dist(f, K_N) strictly decreasing and below 1e-6 for some N <= 80", p.source,
                     [](const GalleryProblem& q) {
                       const auto probe =
                           detail::density_probe(q.op, q.g, embed(q.op, *q.known_solution),
                                                 std::min<Index>(80, q.truncation), 1e-6);
                       const bool ok = probe.first_below > 0 && probe.strictly_decreasing;
                       return FactOutcome{ok, static_cast<double>(probe.first_below), 80.0,
                                          "first N below 1e-6"};
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// Right shift on l^2(Z), window {-M..M}; g = e_2, f = e_1.
inline GalleryProblem right_shift_problem(Index m = 256) {
  if (m < 12) throw ParameterError("right_shift_problem: M must be >= 12");
  const Index size = 2 * m + 1;
  const SpaceId space{"l2(Z)", size};
  auto e = [&](Index n) { return HVector::unit(space, n + m); };
  GalleryProblem p{"right-shift",
                   weighted_shift_operator("right-shift", space, 1, Vector::Ones(size),
                                           WindowEdges::both),
                   e(2), DomainElement(e(1)), {}, {}, size, {}, {}, {}};
  p.params["M"] = static_cast<double>(m);
  p.source = "right-shift example";
  p.facts.push_back({"basis-is-shifted", "K_5 basis is e_2..e_6", p.source,
                     [m](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, 5);
                       double worst = 0.0;
                       for (Index k = 0; k < 5; ++k) {
                         worst = std::max(worst, std::abs(std::abs(b.q(m + 2 + k, k)) - 1.0));
                       }
                       return detail::at_most(worst, 1e-14);
                     }});
  p.facts.push_back({"not-krylov-solution", "dist(e_1, K_N) = 1 for N = 1..100", p.source,
                     [m](const GalleryProblem& q) {
                       const Index n_max = std::min<Index>(100, m - 2);
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, n_max);
                       const HVector f = embed(q.op, *q.known_solution);
                       double worst = 0.0;
                       for (Index n = 1; n <= n_max; ++n) {
                         worst = std::max(worst, std::abs(distance_to_krylov(b.leading(n), f) - 1.0));
                       }
                       return detail::at_most(worst, 1e-12);
                     }});
  p.facts.push_back({"krylov-intersection", "I(R, e_2) = span{e_2}: dim 1, smallest angle < 1e-8",
                     p.source, [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, 20);
                       const auto res = krylov_intersection(q.op, b);
                       const double smallest = res.angles.empty() ? 1.0 : res.angles.front();
                       return FactOutcome{res.dim == 1 && smallest < 1e-8, smallest, 1e-8,
                                          "dim " + std::to_string(res.dim)};
                     }});
  p.facts.push_back({"reducibility-defect", "||P A (1-P)|| = 1 (R e_1 = e_2)", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, 20);
                       return detail::at_most(std::abs(reducibility_defects(q.op, b).d2 - 1.0),
                                              1e-12);
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// Volterra operator on L^2[0,1]; g = x^2/2, f = x. Composite
/// Gauss-Legendre with 8-point panels.
inline GalleryProblem volterra_problem(int n_quad = 256) {
  constexpr int kPanel = 8;
  if (n_quad < kPanel || n_quad % kPanel != 0) {
    throw ParameterError("volterra_problem: n_quad must be a positive multiple of 8");
  }
  const int panels = n_quad / kPanel;
  const quadrature::Rule rule = quadrature::composite_gauss_legendre(panels, kPanel, 0.0, 1.0);
  const quadrature::Rule ref = quadrature::gauss_legendre(kPanel, 0.0, 1.0);
  const Eigen::MatrixXd local = quadrature::lagrange_partial_integrals(ref.nodes);
  const double h = 1.0 / panels;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n_quad, n_quad);
  for (int p = 0; p < panels; ++p) {
    for (int a = 0; a < kPanel; ++a) {
      const int row = p * kPanel + a;
      for (int b = 0; b < kPanel; ++b) v(row, p * kPanel + b) = h * local(a, b);
      for (int j = 0; j < p * kPanel; ++j) v(row, j) = rule.weights(j);
    }
  }
  const RealVector s = rule.weights.cwiseSqrt();
  const Eigen::MatrixXd vhat = s.asDiagonal() * v * s.cwiseInverse().asDiagonal();
  const SpaceId space{"L2[0,1]", n_quad};
  const RealVector x = rule.nodes;
  const Vector g = s.cwiseProduct(x.cwiseProduct(x) / 2.0).cast<Complex>();
  const Vector f = s.cwiseProduct(x).cast<Complex>();
  GalleryProblem p{"volterra",
                   Operator("volterra", space,
                            QuadratureIntegralKind{vhat.cast<Complex>(), rule.nodes, rule.weights}),
                   HVector(space, g), DomainElement(HVector(space, f)), {}, {}, n_quad, {}, {}, {}};
  p.params["n_quad"] = n_quad;
  p.source = "Volterra example";
  p.facts.push_back({"quadrature-residual", "||V f - g|| below 1e-8", p.source,
                     [](const GalleryProblem& q) {
                       return detail::at_most(known_solution_residual(q), 1e-8);
                     }});
  p.facts.push_back({"datum-norm", "||g||^2 = 1/20", p.source, [](const GalleryProblem& q) {
                       return detail::at_most(std::abs(q.g.coords().squaredNorm() - 0.05), 1e-12);
                     }});
  p.facts.push_back({"krylov-density", "dist(f, K_N) decreasing, below 1e-3 for some N <= 60",
                     p.source, [](const GalleryProblem& q) {
                       const auto probe = detail::density_probe(
                           q.op, q.g, embed(q.op, *q.known_solution), 60, 1e-3);
                       bool monotone = true;
                       for (size_t i = 1; i < probe.series.size(); ++i) {
                         monotone = monotone && probe.series[i] <= probe.series[i - 1] + 1e-12;
                       }
                       return FactOutcome{probe.first_below > 0 && monotone,
                                          static_cast<double>(probe.first_below), 60.0,
                                          "first N below 1e-3"};
                     }});
  return p;
}

/// Creation operator in the Hermite basis: A psi_n = sqrt(n+1) psi_{n+1}, g = psi_1.
inline GalleryProblem creation_hermite(Index m = 128) {
  if (m < 16) throw ParameterError("creation_hermite: M must be >= 16");
  const SpaceId space{"L2(R)/Hermite", m};
  Vector w(m);
  for (Index n = 0; n < m; ++n) w(n) = std::sqrt(static_cast<double>(n + 1));
  GalleryProblem p{"creation",
                   weighted_shift_operator("creation", space, 1, w, WindowEdges::trailing),
                   HVector::unit(space, 1), DomainElement(HVector::unit(space, 0)), {}, {}, m,
                   {}, {}, {}};
  p.params["M"] = static_cast<double>(m);
  p.source = "creation operator example";
  p.facts.push_back({"psi0-outside-closure", "dist(psi_0, K_N) = 1 for N = 1..40", p.source,
                     [](const GalleryProblem& q) {
                       const Index n_max = std::min<Index>(40, q.truncation - 2);
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, n_max);
                       const HVector e0 = HVector::unit(q.op.space(), 0);
                       double worst = 0.0;
                       for (Index n = 1; n <= n_max; ++n) {
                         worst = std::max(worst, std::abs(distance_to_krylov(b.leading(n), e0) - 1.0));
                       }
                       return detail::at_most(worst, 1e-12);
                     }});
  p.facts.push_back({"range-gap", "dist(psi_1, span A K_N) = 1", p.source,
                     [](const GalleryProblem& q) {
                       const Index n_max = std::min<Index>(40, q.truncation - 2);
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, n_max);
                       const Matrix aq = detail::orthonormal_range(q.op.apply(b.q));
                       const double d = detail::residual_norm(aq, q.g.coords());
                       return detail::at_most(std::abs(d - 1.0), 1e-12);
                     }});
  p.facts.push_back({"weight", "||A psi_3|| = 2", p.source, [](const GalleryProblem& q) {
                       const double v = apply(q.op, HVector::unit(q.op.space(), 3)).norm();
                       return detail::at_most(std::abs(v - 2.0), 1e-15);
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// A e_n = (n+1) e_{n+1}, g = e_0; core-condition test vector x_n = 1/(n+1)^2, n >= 1.
inline GalleryProblem weighted_shift_np1(Index m = 64) {
  if (m < 8) throw ParameterError("weighted_shift_np1: M must be >= 8");
  const SpaceId space{"l2(N0)", m};
  Vector w(m);
  Vector x = Vector::Zero(m);
  for (Index n = 0; n < m; ++n) w(n) = static_cast<double>(n + 1);
  for (Index n = 1; n < m; ++n) x(n) = 1.0 / ((n + 1.0) * (n + 1.0));
  GalleryProblem p{"weighted-shift",
                   weighted_shift_operator("weighted-shift-n+1", space, 1, w,
                                           WindowEdges::trailing),
                   HVector::unit(space, 0), std::nullopt, {}, {}, m, {}, {}, {}};
  p.vectors.emplace("core-test", DomainElement(HVector(space, x)));
  p.params["M"] = static_cast<double>(m);
  p.source = "Krylov-core weighted-shift example";
  p.notes.push_back("g = e_0 is not in the range of A: no known solution");
  p.facts.push_back({"canonical-basis", "K_4 basis is e_0..e_3", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, 4);
                       const Matrix expected = Matrix::Identity(q.truncation, 4);
                       return detail::at_most((b.q.cwiseAbs() - expected.cwiseAbs()).norm(), 1e-14);
                     }});
  p.facts.push_back({"graph-norm-e0", "||e_0||_A = sqrt(2)", p.source, [](const GalleryProblem& q) {
                       return detail::at_most(
                           std::abs(graph_norm(q.op, HVector::unit(q.op.space(), 0)) - std::sqrt(2.0)),
                           1e-15);
                     }});
  p.facts.push_back(
      {"core-decay",
       "graph distance of x to K_N nonincreasing, bounded by the explicit approximants "
       "x_n + 1/(n^2 N), below 1e-6 at the window order",
       p.source, [](const GalleryProblem& q) {
         const Index m = q.truncation;
         std::vector<Index> orders;
         for (Index n = 1; n <= m; ++n) orders.push_back(n);
         const DomainElement& x = q.vectors.at("core-test");
         const CoreDecay cd = core_condition_decay(q.op, q.g, x, orders);
         bool ok = true;
         for (size_t i = 1; i < cd.series.size(); ++i) {
           ok = ok && cd.series[i].value <= cd.series[i - 1].value * (1.0 + 1e-12) + 1e-15;
         }
         for (Index n = 1; n + 1 <= m; ++n) {
           Vector approx = Vector::Zero(m);
           for (Index k = 1; k <= n && k < m; ++k) {
             approx(k) = x.t.coords()(k) + 1.0 / (double(k) * k * n);
           }
           const double bound =
               graph_norm(q.op, DomainElement(HVector(q.op.space(), x.t.coords() - approx)));
           ok = ok && cd.series[static_cast<size_t>(n)].value <= bound * (1.0 + 1e-12);
         }
         Index first = 0;
         for (const auto& pt : cd.series) {
           if (first == 0 && pt.value < 1e-6) first = pt.n;
         }
         return FactOutcome{ok && first > 0, static_cast<double>(first), static_cast<double>(m),
                            "first N below 1e-6"};
       }});
  return p;
}

/// Domain-extension escape construction. H = span{e_0} + H', T = 0 + T',
/// T' = diag(1..M), g' = decay^n, x0_n = 1/n, A x0 := e_0.
inline GalleryProblem escape_operator(Index m = 30, double decay = 0.5) {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw ParameterError("escape_operator: decay must lie in (0, 1)");
  }
  if (m < 2) throw ParameterError("escape_operator: M must be >= 2");
  const SpaceId space{"span{e0}+l2", m + 1};
  Vector diag = Vector::Zero(m + 1);
  Vector g = Vector::Zero(m + 1);
  Vector x0 = Vector::Zero(m + 1);
  Vector sol = Vector::Zero(m + 1);
  double gn = 1.0;
  for (Index n = 1; n <= m; ++n) {
    gn *= decay;
    diag(n) = static_cast<double>(n);
    g(n) = gn;
    x0(n) = 1.0 / static_cast<double>(n);
    sol(n) = gn / static_cast<double>(n);
  }
  Vector y0 = Vector::Zero(m + 1);
  y0(0) = 1.0;
  Operator base = diagonal_operator("escape-base", space, diag);
  GalleryProblem p{"escape", domain_extension_operator("escape", std::move(base), x0, y0),
                   HVector(space, g), DomainElement(HVector(space, sol)), {}, {}, m + 1, {}, {}, {}};
  p.vectors.emplace("x0", DomainElement(HVector::zero(space), 1.0));
  p.params["M"] = static_cast<double>(m);
  p.params["decay"] = decay;
  p.source = "Krylov escape example";
  p.notes.push_back(
      "model artifact: at finite M, x0 lies in D(T'); escape is witnessed only through the rule "
      "A x0 := e_0, not as a finite-dimensional phenomenon");
  p.facts.push_back({"special-image", "A x0 = e_0", p.source, [](const GalleryProblem& q) {
                       const HVector ax = apply(q.op, q.vectors.at("x0"));
                       return detail::at_most((ax - HVector::unit(q.op.space(), 0)).norm(), 0.0);
                     }});
  p.facts.push_back({"escape-indicator", "||(1 - P_K) A x0|| = 1", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, q.truncation);
                       const auto r = escape_indicator(q.op, b, q.vectors.at("x0"));
                       return detail::at_most(std::abs(r.indicator - 1.0), 1e-12);
                     }});
  p.facts.push_back({"x0-membership", "dist(x0, K_N) <= 1e-6 for some N <= M", p.source,
                     [](const GalleryProblem& q) {
                       const Index m = q.truncation - 1;
                       const auto probe = detail::density_probe(
                           q.op, q.g, embed(q.op, q.vectors.at("x0")), m, 1e-6);
                       return FactOutcome{probe.first_below > 0,
                                          static_cast<double>(probe.first_below),
                                          static_cast<double>(m), "first N below 1e-6"};
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// A~ = D + |phi0><phi0| on H + H with D = diag(1..M), g = ones, phi0 = ones/sqrt(M).
/// f~ = f + 0 is the Krylov solution, f + xi (xi orthogonal to phi0) another.
inline GalleryProblem noninjective_direct_sum(Index m = 16) {
  if (m < 2) throw ParameterError("noninjective_direct_sum: M must be >= 2");
  const SpaceId space{"H+H", 2 * m};
  Matrix a = Matrix::Zero(2 * m, 2 * m);
  for (Index n = 0; n < m; ++n) a(n, n) = static_cast<double>(n + 1);
  const Vector phi = Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  a.bottomRightCorner(m, m) = phi * phi.adjoint();
  Vector g = Vector::Zero(2 * m);
  Vector f = Vector::Zero(2 * m);
  for (Index n = 0; n < m; ++n) {
    g(n) = 1.0;
    f(n) = 1.0 / static_cast<double>(n + 1);
  }
  Vector fxi = f;
  fxi(m) = 1.0;
  fxi(m + 1) = -1.0;
  GalleryProblem p{"direct-sum", dense_operator("direct-sum", space, a), HVector(space, g),
                   DomainElement(HVector(space, f)), {}, {}, 2 * m, {}, {}, {}};
  p.vectors.emplace("non-krylov-solution", DomainElement(HVector(space, fxi)));
  p.params["M"] = static_cast<double>(m);
  p.source = "non-injective direct-sum example";
  p.facts.push_back({"second-solution", "A~(f + xi) = g~ for xi orthogonal to phi0", p.source,
                     [](const GalleryProblem& q) {
                       const HVector r = apply(q.op, q.vectors.at("non-krylov-solution")) - q.g;
                       return detail::at_most(r.norm(), 1e-12);
                     }});
  p.facts.push_back({"krylov-solution", "dist(f + 0, K_M) -> 0", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, q.truncation / 2);
                       return detail::at_most(distance_to_krylov(b, embed(q.op, *q.known_solution)),
                                              1e-8);
                     }});
  p.facts.push_back({"non-krylov-distance", "dist(f + xi, K_M) >= ||xi||", p.source,
                     [](const GalleryProblem& q) {
                       const Index m = q.truncation / 2;
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, m);
                       const HVector fx = embed(q.op, q.vectors.at("non-krylov-solution"));
                       const double xi = fx.coords().tail(m).norm();
                       const double d = distance_to_krylov(b, fx);
                       return FactOutcome{d >= xi - 1e-10, d, xi, "distance vs ||xi||"};
                     }});
  p.facts.push_back({"kernel-dimension", "ker A~ on the second summand has dimension M-1",
                     p.source, [](const GalleryProblem& q) {
                       const Index m = q.truncation / 2;
                       const Matrix block = q.op.dense().bottomRightCorner(m, m);
                       const RealVector s = Eigen::JacobiSVD<Matrix>(block).singularValues();
                       Index zeros = 0;
                       for (Index i = 0; i < s.size(); ++i) zeros += s(i) <= 1e-12 ? 1 : 0;
                       return FactOutcome{zeros == m - 1, static_cast<double>(zeros),
                                          static_cast<double>(m - 1), "null singular values"};
                     }});
  p.facts.push_back({"cg-minimal-norm", "CG from zero returns the Krylov solution f + 0",
                     p.source, [](const GalleryProblem& q) {
                       CgOptions o;
                       o.rtol = 1e-13;
                       const SolveReport r = cg_solve(q.op, q.g, o);
                       const double err = (r.solution - embed(q.op, *q.known_solution)).norm();
                       return FactOutcome{r.converged && err <= 1e-8, err, 1e-8, ""};
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

/// Self-adjoint reference: diag(1..M) with g on even coordinates only, so
/// K(A,g) is a proper invariant subspace.
inline GalleryProblem diagonal_problem(Index m = 32) {
  if (m < 4) throw ParameterError("diagonal_problem: M must be >= 4");
  const SpaceId space{"l2", m};
  Vector d(m);
  Vector g = Vector::Zero(m);
  for (Index n = 0; n < m; ++n) {
    d(n) = static_cast<double>(n + 1);
    if (n % 2 == 0) g(n) = 1.0;
  }
  const Vector f = g.cwiseQuotient(d);
  GalleryProblem p{"diagonal", diagonal_operator("diagonal", space, d), HVector(space, g),
                   DomainElement(HVector(space, f)), {}, {}, m, {}, {}, {}};
  p.params["M"] = static_cast<double>(m);
  p.source = "bounded self-adjoint operators are Krylov-reduced";
  p.facts.push_back({"self-adjoint-structure",
                     "intersection dim 0 and both reducibility defects <= 1e-10", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, q.truncation);
                       const auto in = krylov_intersection(q.op, b);
                       const auto rd = reducibility_defects(q.op, b);
                       const double worst = std::max(rd.d1, rd.d2);
                       return FactOutcome{in.dim == 0 && worst <= 1e-10, worst, 1e-10,
                                          "intersection dim " + std::to_string(in.dim)};
                     }});
  p.facts.push_back({"krylov-solution", "solution lies in K(A,g)", p.source,
                     [](const GalleryProblem& q) {
                       const KrylovBasis b = build_krylov_basis(q.op, q.g, q.truncation);
                       const HVector f = embed(q.op, *q.known_solution);
                       return detail::at_most(distance_to_krylov(b, f), 1e-10 * f.norm());
                     }});
  p.facts.push_back({"cg-solution", "CG recovers f", p.source, [](const GalleryProblem& q) {
                       CgOptions o;
                       o.rtol = 1e-13;
                       const SolveReport r = cg_solve(q.op, q.g, o);
                       const double err = (r.solution - embed(q.op, *q.known_solution)).norm();
                       return FactOutcome{r.converged && err <= 1e-10, err, 1e-10, ""};
                     }});
  p.facts.push_back(detail::residual_fact(p.source));
  return p;
}

// ---------------------------------------------------------------------------
// Catalog

struct GalleryEntry {
  std::string id;
  std::string title;
  std::string source;
  std::vector<std::pair<std::string, double>> defaults;
  std::function<GalleryProblem(const ProblemParams&)> build;
};

inline const std::vector<GalleryEntry>& gallery_catalog() {
  static const std::vector<GalleryEntry> catalog = {
      {"multiplication", "multiplication by z on L^2 of the disk |z-2|<1", "multiplication operator example",
       {{"n_grid", 64}},
       [](const ProblemParams& p) { return multiplication_annulus(p.n_grid.value_or(64)); }},
      {"left-shift", "left shift on l^2(N0), g_n = 1/n!", "left-shift example", {{"M", 128}},
       [](const ProblemParams& p) { return left_shift_problem(p.M.value_or(128)); }},
      {"right-shift", "right shift on l^2(Z), g = e_2", "right-shift example", {{"M", 256}},
       [](const ProblemParams& p) { return right_shift_problem(p.M.value_or(256)); }},
      {"direct-sum", "non-injective direct sum A + |phi0><phi0|", "non-injective direct-sum example",
       {{"M", 16}},
       [](const ProblemParams& p) { return noninjective_direct_sum(p.M.value_or(16)); }},
      {"volterra", "Volterra operator on L^2[0,1], g = x^2/2", "Volterra example",
       {{"n_quad", 256}},
       [](const ProblemParams& p) { return volterra_problem(p.n_quad.value_or(256)); }},
      {"creation", "creation operator in the Hermite basis, g = psi_1",
       "creation operator example", {{"M", 128}},
       [](const ProblemParams& p) { return creation_hermite(p.M.value_or(128)); }},
      {"weighted-shift", "weighted shift A e_n = (n+1) e_{n+1}, g = e_0",
       "Krylov-core weighted-shift example", {{"M", 64}},
       [](const ProblemParams& p) { return weighted_shift_np1(p.M.value_or(64)); }},
      {"escape", "domain extension with A x0 := e_0", "Krylov escape example",
       {{"M", 30}, {"decay", 0.5}},
       [](const ProblemParams& p) {
         return escape_operator(p.M.value_or(30), p.decay.value_or(0.5));
       }},
      {"diagonal", "diag(1..M) with g on even coordinates",
       "bounded self-adjoint operators are Krylov-reduced", {{"M", 32}},
       [](const ProblemParams& p) { return diagonal_problem(p.M.value_or(32)); }},
  };
  return catalog;
}

inline const GalleryEntry* find_gallery_entry(const std::string& id) {
  for (const auto& e : gallery_catalog()) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

inline GalleryProblem make_problem(const std::string& id, const ProblemParams& params = {}) {
  const GalleryEntry* e = find_gallery_entry(id);
  if (e == nullptr) throw ParameterError("unknown gallery problem '" + id + "'");
  return e->build(params);
}

}  // namespace krylovlab
