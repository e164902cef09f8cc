#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "krylovlab/gallery.hpp"
#include "krylovlab/krylov.hpp"

using namespace krylovlab;

namespace {

// Distances from 300-digit Gram-Schmidt on raw power vectors.
const std::vector<double> kLeftShiftDistances = {
    1.0815170896229793,     0.35401162384010702,   0.052161480730882093,  0.0049170013014737469,
    0.00033928701215134062, 1.8427148194615424e-5, 8.2431460800007984e-7, 3.1329923571701418e-8,
    1.0347904244242702e-9,  3.0213613682934313e-11};

const std::vector<double> kEscapeDistances = {
    0.41326876965027325,    0.36332376737854068,    0.25817996226959934,   0.21804165284625449,
    0.17547139601535355,    0.14534166489678039,    0.11629704153635307,   0.090248102758717267,
    0.064796704464603805,   0.041764408745267711,   0.023204293982250749,  0.011079916846025372,
    0.0045755339905085842,  0.0016708193305387437,  0.00054286228977324701, 0.00015941407367012905,
    4.212413045974744e-5,   1.017545933239326e-5,   2.2103564839812346e-6, 4.4318185049758399e-7};

// dist(x, span{x^2, ..., x^{N+1}}) in L^2[0,1], N = 1..20.
const std::vector<double> kVolterraDistances = {
    0.14433756729740644,   0.057735026918962576,  0.028867513459481288,  0.01649572197684645,
    0.010309826235529032,  0.0068732174903526877, 0.0048112522432468814, 0.0034990925405431865,
    0.0026243194054073898, 0.0020187072349287614, 0.0015861271131583125, 0.00126890169052665,
    0.0010309826235529032, 0.00084904451351415554, 0.00070753709459512961, 0.00059582071123800388,
    0.0005064476045523033, 0.00043409794675911712, 0.00037490277220105569, 0.00032600241060961364};

Operator diag(const std::vector<double>& d) {
  Vector v(static_cast<Index>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) v(static_cast<Index>(i)) = d[i];
  return diagonal_operator("diag", {"test", v.size()}, v);
}

Operator random_dense(Index m, std::mt19937_64& rng, bool hermitian) {
  Matrix a(m, m);
  for (Index j = 0; j < m; ++j) a.col(j) = random_coords(m, rng);
  if (hermitian) a = (0.5 * (a + a.adjoint())).eval();
  return dense_operator(hermitian ? "rand-herm" : "rand", {"rand", m}, a);
}

// Projection residual onto explicitly orthogonalized {g, Ag, ..., A^{N-1} g}.
double brute_force_distance(const Operator& op, const HVector& g, Index n, const HVector& f) {
  Matrix powers(op.dim(), n);
  Vector v = g.coords();
  for (Index k = 0; k < n; ++k) {
    powers.col(k) = v;
    v = op.apply(v);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(powers);
  const Matrix q = Matrix(qr.householderQ()).leftCols(qr.rank());
  const Vector r = f.coords() - q * (q.adjoint() * f.coords());
  return r.norm();
}

}  // namespace

TEST(BuildKrylovBasis, RightShiftGivesShiftedUnitVectors) {
  const GalleryProblem p = right_shift_problem(16);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 3);
  ASSERT_EQ(b.size(), 3);
  const Index centre = 16;  // index of e_0 in the window
  for (Index k = 0; k < 3; ++k) {
    Vector e = Vector::Zero(p.op.dim());
    e(centre + 2 + k) = 1.0;
    EXPECT_LE((b.q.col(k) - e).norm(), 1e-15);
  }
}

TEST(BuildKrylovBasis, TwoEigenvaluesBreakDownAtTwo) {
  const Operator a = diag({1, 2});
  Vector g(2);
  g << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const KrylovBasis b = build_krylov_basis(a, HVector(a.space(), g), 3);
  ASSERT_TRUE(b.breakdown_at.has_value());
  EXPECT_EQ(*b.breakdown_at, 2);
  EXPECT_EQ(b.size(), 2);
}

TEST(BuildKrylovBasis, WeightedShiftSpansLeadingCoordinates) {
  const GalleryProblem p = weighted_shift_np1(16);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 4);
  ASSERT_EQ(b.size(), 4);
  for (Index k = 0; k < 4; ++k) {
    EXPECT_NEAR(std::abs(b.q(k, k)), 1.0, 1e-15);
    EXPECT_NEAR(b.q.col(k).norm(), 1.0, 1e-15);
  }
}

TEST(BuildKrylovBasis, Errors) {
  const Operator a = diag({1, 2, 3});
  EXPECT_THROW(build_krylov_basis(a, HVector::zero(a.space()), 2), EmptyBasisError);
  EXPECT_THROW(build_krylov_basis(a, HVector::unit(a.space(), 0), 0), ParameterError);
  EXPECT_THROW(build_krylov_basis(a, HVector::unit({"other", 3}, 0), 2), DimensionError);
}

TEST(BuildKrylovBasis, GramMatrixIsIdentity) {
  for (const auto& entry : gallery_catalog()) {
    const GalleryProblem p = entry.build({});
    const KrylovBasis b = build_krylov_basis(p.op, p.g, std::min<Index>(40, p.op.dim()));
    const Matrix gram = b.q.adjoint() * b.q;
    EXPECT_LE((gram - Matrix::Identity(b.size(), b.size())).norm(), 1e-12) << entry.id;
  }
}

TEST(DistanceToKrylov, ZeroForMembersOfTheSpan) {
  std::mt19937_64 rng(2);
  const Operator a = random_dense(10, rng, false);
  const HVector g = random_hvector(a.space(), rng);
  const KrylovBasis b = build_krylov_basis(a, g, 4);
  const Vector coeff = random_coords(4, rng);
  const HVector f(a.space(), b.q * coeff);
  EXPECT_LE(distance_to_krylov(b, f), 1e-12 * f.norm());
}

TEST(DistanceToKrylov, RightShiftSolutionStaysAtDistanceOne) {
  const GalleryProblem p = right_shift_problem(64);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 40);
  const HVector f = embed(p.op, *p.known_solution);
  for (Index n = 1; n <= 40; ++n) EXPECT_NEAR(distance_to_krylov(b.leading(n), f), 1.0, 1e-12);
}

TEST(DistanceToKrylov, LeftShiftMatchesHighPrecisionOracle) {
  const GalleryProblem p = left_shift_problem(128);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 12);
  const HVector f = embed(p.op, *p.known_solution);
  for (size_t i = 0; i < kLeftShiftDistances.size(); ++i) {
    const Index n = static_cast<Index>(i) + 1;
    EXPECT_NEAR(distance_to_krylov(b.leading(n), f), kLeftShiftDistances[i], 1e-10) << "N=" << n;
  }
}

TEST(DistanceToKrylov, EscapeMembershipMatchesHighPrecisionOracle) {
  const GalleryProblem p = escape_operator(30, 0.5);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 20);
  const HVector x0 = embed(p.op, p.vectors.at("x0"));
  for (size_t i = 0; i < kEscapeDistances.size(); ++i) {
    const Index n = static_cast<Index>(i) + 1;
    EXPECT_NEAR(distance_to_krylov(b.leading(n), x0), kEscapeDistances[i], 1e-10) << "N=" << n;
  }
}

TEST(DistanceToKrylov, VolterraMatchesContinuumOracle) {
  const GalleryProblem p = volterra_problem(256);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 20);
  const HVector f = embed(p.op, *p.known_solution);
  for (size_t i = 0; i < kVolterraDistances.size(); ++i) {
    const Index n = static_cast<Index>(i) + 1;
    EXPECT_NEAR(distance_to_krylov(b.leading(n), f), kVolterraDistances[i], 1e-10) << "N=" << n;
  }
}

TEST(DistanceToKrylov, MultiplicationMatchesTaylorTailFormula) {
  // dist_N^2 = sum_{k>=N} pi / ((k+1) 4^{k+1}) for 1/z on |z-2|<1
  const GalleryProblem p = multiplication_annulus(64);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 12);
  const HVector f = embed(p.op, *p.known_solution);
  for (Index n = 1; n <= 12; ++n) {
    double tail = 0.0;
    for (int k = static_cast<int>(n); k < 200; ++k) {
      tail += std::numbers::pi / ((k + 1) * std::pow(4.0, k + 1));
    }
    EXPECT_NEAR(distance_to_krylov(b.leading(n), f), std::sqrt(tail), 1e-10) << "N=" << n;
  }
}

TEST(Properties, OracleEquivalenceOnSmallProblems) {
  std::mt19937_64 rng(29);
  for (Index m = 3; m <= 12; ++m) {
    const Operator a = random_dense(m, rng, m % 2 == 0);
    const HVector g = random_hvector(a.space(), rng);
    const HVector f = random_hvector(a.space(), rng);
    const KrylovBasis b = build_krylov_basis(a, g, m);
    for (Index n = 1; n <= std::min<Index>(m, 6); ++n) {
      EXPECT_NEAR(distance_to_krylov(b.leading(n), f), brute_force_distance(a, g, n, f), 1e-10)
          << "M=" << m << " N=" << n;
    }
  }
}

TEST(Properties, ProjectorIdempotence) {
  std::mt19937_64 rng(31);
  for (const auto& entry : gallery_catalog()) {
    const GalleryProblem p = entry.build({});
    const KrylovBasis b = build_krylov_basis(p.op, p.g, std::min<Index>(15, p.op.dim()));
    const HVector f = random_hvector(p.op.space(), rng);
    const HVector pf = project_onto_krylov(b, f);
    EXPECT_LE((project_onto_krylov(b, pf) - pf).norm(), 1e-12 * f.norm()) << entry.id;
  }
}

TEST(Properties, NestedSpacesGiveMonotoneDistances) {
  std::mt19937_64 rng(37);
  for (const auto& entry : gallery_catalog()) {
    const GalleryProblem p = entry.build({});
    const KrylovBasis b = build_krylov_basis(p.op, p.g, std::min<Index>(25, p.op.dim()));
    const HVector f = random_hvector(p.op.space(), rng);
    for (Index n = 1; n < b.size(); ++n) {
      EXPECT_LE(distance_to_krylov(b.leading(n + 1), f), distance_to_krylov(b.leading(n), f) + 1e-12)
          << entry.id << " N=" << n;
    }
  }
}

TEST(Properties, BasisColumnsMapIntoNextKrylovSpace) {
  for (const auto& entry : gallery_catalog()) {
    const GalleryProblem p = entry.build({});
    const Index n = std::min<Index>(10, p.op.dim() - 1);
    const KrylovBasis big = build_krylov_basis(p.op, p.g, n + 1);
    if (big.size() < n + 1) continue;  // breakdown before N+1
    const KrylovBasis small = big.leading(n);
    for (Index j = 0; j < n; ++j) {
      const HVector aq(p.op.space(), p.op.apply(Vector(small.q.col(j))));
      EXPECT_LE(distance_to_krylov(big, aq), 1e-10 * aq.norm()) << entry.id << " column " << j;
    }
  }
}

TEST(KrylovIntersection, RightShiftHasOneDimensionalIntersection) {
  const GalleryProblem p = right_shift_problem(256);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 20);
  const IntersectionResult r = krylov_intersection(p.op, b);
  EXPECT_EQ(r.dim, 1);
  ASSERT_FALSE(r.angles.empty());
  EXPECT_LT(r.angles.front(), 1e-8);
}

TEST(KrylovIntersection, SelfAdjointGalleryOperatorsAreTrivial) {
  for (const char* id : {"diagonal", "direct-sum"}) {
    const GalleryProblem p = make_problem(id);
    const KrylovBasis b = build_krylov_basis(p.op, p.g, 10);
    EXPECT_EQ(krylov_intersection(p.op, b).dim, 0) << id;
  }
}

TEST(KrylovIntersection, IdentityIsTrivial) {
  const Operator id = diag(std::vector<double>(12, 1.0));
  std::mt19937_64 rng(41);
  const KrylovBasis b = build_krylov_basis(id, random_hvector(id.space(), rng), 5);
  const IntersectionResult r = krylov_intersection(id, b);
  EXPECT_EQ(r.dim, 0);
}

TEST(KrylovIntersection, FullSpaceGivesEmptyComplementNote) {
  const Operator a = diag({1, 2, 3});
  const KrylovBasis b = build_krylov_basis(a, HVector(a.space(), Vector::Ones(3)), 3);
  const IntersectionResult r = krylov_intersection(a, b);
  EXPECT_EQ(r.dim, 0);
  EXPECT_FALSE(r.notes.empty());
}

TEST(PrincipalAngles, KnownPlanes) {
  Matrix u = Matrix::Zero(3, 1);
  u(0, 0) = 1.0;
  Matrix v = Matrix::Zero(3, 1);
  v(0, 0) = std::cos(0.3);
  v(1, 0) = std::sin(0.3);
  const auto a = principal_angles(u, v);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_NEAR(a[0], 0.3, 1e-15);
  // tiny angles resolved through sines
  v(0, 0) = std::cos(1e-10);
  v(1, 0) = std::sin(1e-10);
  EXPECT_NEAR(principal_angles(u, v)[0], 1e-10, 1e-20);
}

TEST(ReducibilityDefects, DiagonalIsReduced) {
  // K_N is invariant only once N reaches the breakdown order (16 here)
  const GalleryProblem p = diagonal_problem(32);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 40);
  ASSERT_EQ(b.breakdown_at, std::optional<Index>(16));
  const ReducibilityDefects d = reducibility_defects(p.op, b);
  EXPECT_LE(d.d1, 1e-10);
  EXPECT_LE(d.d2, 1e-10);
  EXPECT_TRUE(d.reduced(1e-10));
}

TEST(ReducibilityDefects, RightShiftHasUnitSecondDefect) {
  const GalleryProblem p = right_shift_problem(64);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 10);
  EXPECT_NEAR(reducibility_defects(p.op, b).d2, 1.0, 1e-12);
}

TEST(ReducibilityDefects, ZeroOperator) {
  const Operator z = diag(std::vector<double>(6, 0.0));
  const KrylovBasis b = build_krylov_basis(z, HVector::unit(z.space(), 2), 3);
  const ReducibilityDefects d = reducibility_defects(z, b);
  EXPECT_EQ(d.d1, 0.0);
  EXPECT_EQ(d.d2, 0.0);
}

TEST(EscapeIndicator, EscapeProblemGivesUnitIndicator) {
  const GalleryProblem p = escape_operator(30, 0.5);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 20);
  const EscapeResult r = escape_indicator(p.op, b, p.vectors.at("x0"));
  EXPECT_NEAR(r.indicator, 1.0, 1e-12);
  EXPECT_LE(r.membership_distance, 1e-6);
  EXPECT_FALSE(r.inconclusive);
}

TEST(EscapeIndicator, SmallOrderIsInconclusive) {
  const GalleryProblem p = escape_operator(30, 0.5);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 5);
  const EscapeResult r = escape_indicator(p.op, b, p.vectors.at("x0"));
  EXPECT_TRUE(r.inconclusive);
  EXPECT_FALSE(r.note.empty());
}

TEST(EscapeIndicator, SelfAdjointSpanIsInvariant) {
  const GalleryProblem p = diagonal_problem(32);
  const KrylovBasis b = build_krylov_basis(p.op, p.g, 40);
  std::mt19937_64 rng(43);
  const HVector x(p.op.space(), b.q * random_coords(b.size(), rng));
  const EscapeResult r = escape_indicator(p.op, b, x);
  EXPECT_LE(r.indicator, 1e-10 * x.norm());
}

TEST(EscapeIndicator, PlainOperatorLeadingColumns) {
  std::mt19937_64 rng(47);
  const Operator a = random_dense(12, rng, false);
  const HVector g = random_hvector(a.space(), rng);
  const KrylovBasis big = build_krylov_basis(a, g, 6);
  const HVector q(a.space(), Vector(big.q.col(2)));
  EXPECT_LE(escape_indicator(a, big, q).indicator, 1e-12 * norm_estimate(a));
}

TEST(CoreConditionDecay, WeightedShiftSeriesDecreasesAndBeatsExplicitApproximants) {
  const GalleryProblem p = weighted_shift_np1(64);
  const DomainElement x = p.vectors.at("core-test");
  std::vector<Index> orders;
  for (Index n = 2; n <= 60; n += 2) orders.push_back(n);
  const CoreDecay d = core_condition_decay(p.op, p.g, x, orders);
  ASSERT_EQ(d.series.size(), orders.size());
  for (size_t i = 1; i < d.series.size(); ++i) {
    EXPECT_LT(d.series[i].value, d.series[i - 1].value) << "N=" << d.series[i].n;
  }
  // x^{(N)}_n = x_n + 1/(n^2 N) on n < N lies in K_N + span{e_N}; graph distance of the
  // truncation error bounds the K_{N+1} minimum from above.
  const Vector xc = embed(p.op, x).coords();
  for (const auto& pt : core_condition_decay(p.op, p.g, x, {8, 16, 32}).series) {
    const Index n = pt.n;
    Vector tail = Vector::Zero(p.op.dim());
    tail.segment(n + 1, p.op.dim() - n - 1) = xc.segment(n + 1, p.op.dim() - n - 1);
    const double bound = graph_norm(p.op, HVector(p.op.space(), tail));
    const auto next = core_condition_decay(p.op, p.g, x, {n + 1}).series.front().value;
    EXPECT_LE(next, bound + 1e-12) << "N=" << n;
  }
}

TEST(CoreConditionDecay, MemberOfSpanGivesZero) {
  std::mt19937_64 rng(53);
  const Operator a = random_dense(10, rng, true);
  const HVector g = random_hvector(a.space(), rng);
  const KrylovBasis b = build_krylov_basis(a, g, 4);
  const HVector x(a.space(), b.q * random_coords(4, rng));
  const CoreDecay d = core_condition_decay(a, g, x, {4});
  EXPECT_LE(d.series.front().value, 1e-12 * x.norm());
}

TEST(CoreConditionDecay, OrthogonalVectorStaysAtLeastOne) {
  const GalleryProblem p = creation_hermite(32);
  const DomainElement x(HVector::unit(p.op.space(), 0));
  const CoreDecay d = core_condition_decay(p.op, p.g, x, {1, 5, 10, 20});
  for (const auto& pt : d.series) EXPECT_GE(pt.value, 1.0 - 1e-12) << "N=" << pt.n;
}

TEST(Diagnose, RightShiftReport) {
  const GalleryProblem p = right_shift_problem(256);
  const DiagnosticsReport r = diagnose(p.op, {p.g, p.known_solution, std::nullopt, std::nullopt});
  ASSERT_EQ(r.distances.size(), 3u);
  for (const auto& pt : r.distances) EXPECT_NEAR(pt.value, 1.0, 1e-12);
  EXPECT_EQ(r.intersection.dim, 1);
  EXPECT_NEAR(r.reducibility.d2, 1.0, 1e-12);
  EXPECT_GE(r.notes.size(), 2u);
}

TEST(Diagnose, RejectsBadOrders) {
  const GalleryProblem p = diagonal_problem(8);
  DiagnoseOptions opts;
  opts.orders = {};
  EXPECT_THROW(diagnose(p.op, {p.g, std::nullopt, std::nullopt, std::nullopt}, opts), ParameterError);
  opts.orders = {0, 3};
  EXPECT_THROW(diagnose(p.op, {p.g, std::nullopt, std::nullopt, std::nullopt}, opts), ParameterError);
}
