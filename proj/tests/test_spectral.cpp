#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "snn/spectral.hpp"
#include "support/charpoly.hpp"

namespace snn {
namespace {

std::vector<double> complete_bipartite_spectrum(std::size_t n, std::size_t m) {
  std::vector<double> s{0.0};
  s.insert(s.end(), m - 1, static_cast<double>(n));
  s.insert(s.end(), n - 1, static_cast<double>(m));
  s.push_back(static_cast<double>(n + m));
  std::sort(s.begin(), s.end());
  return s;
}

void expect_spectrum_near(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

TEST(Laplacian, SingleEdge) {
  const auto lap = build_laplacian(fully_connected(1, 1));
  EXPECT_EQ(lap(0, 0), 1.0);
  EXPECT_EQ(lap(0, 1), -1.0);
  EXPECT_EQ(lap(1, 0), -1.0);
  EXPECT_EQ(lap(1, 1), 1.0);
}

TEST(Laplacian, EdgelessIsZero) {
  const auto lap = build_laplacian(from_rows(2, 2, {{}, {}}));
  for (double v : lap.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(lap.rows(), 4u);
}

TEST(Laplacian, CompleteBipartiteDiagonalAndRowSums) {
  const auto lap = build_laplacian(fully_connected(2, 3));
  const std::vector<double> diag{3, 3, 2, 2, 2};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(lap(i, i), diag[i]);
    double row_sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) row_sum += lap(i, j);
    EXPECT_EQ(row_sum, 0.0);
  }
}

TEST(Jacobi, Identity) { expect_spectrum_near(eigenvalues_symmetric(DenseMatrix::identity(3)), {1, 1, 1}, 1e-15); }

TEST(Jacobi, CompleteBipartite23) {
  const auto lap = build_laplacian(fully_connected(2, 3));
  expect_spectrum_near(eigenvalues_symmetric(lap), {0, 2, 2, 3, 5}, 1e-10);
  // Cross-check the closed form with the characteristic polynomial.
  expect_spectrum_near(testing::charpoly_eigenvalues(lap), {0, 2, 2, 3, 5}, 1e-7);
}

TEST(Jacobi, TwoDisjointEdges) {
  const auto t = from_rows(2, 2, {{0}, {1}});
  expect_spectrum_near(eigenvalues_symmetric(build_laplacian(t)), {0, 0, 2, 2}, 1e-12);
}

TEST(Jacobi, RejectsNonSymmetric) {
  DenseMatrix a = DenseMatrix::identity(3);
  a(0, 2) = 0.5;
  try {
    eigenvalues_symmetric(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
  }
  EXPECT_THROW(eigenvalues_symmetric(DenseMatrix(2, 3)), Error);
}

TEST(Jacobi, ReportsNonConvergence) {
  const auto lap = build_laplacian(fully_connected(3, 4));
  try {
    eigenvalues_symmetric(lap, JacobiOptions{1e-12, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
  }
}

TEST(Jacobi, AgreesWithCharacteristicPolynomialOnSmallMatrices) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(4);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform01() * 4.0 - 2.0;
    const auto jac = eigenvalues_symmetric(a);
    const auto ref = testing::charpoly_eigenvalues(a);
    ASSERT_EQ(jac.size(), ref.size());
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(jac[i], ref[i], 1e-8) << "trial " << trial;
  }
}

TEST(Jacobi, CompleteBipartiteClosedFormUpTo12) {
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t m = 1; m <= 12; ++m) {
      const auto eig = eigenvalues_symmetric(build_laplacian(fully_connected(n, m)));
      const auto want = complete_bipartite_spectrum(n, m);
      for (std::size_t i = 0; i < eig.size(); ++i) ASSERT_NEAR(eig[i], want[i], 1e-8) << n << "x" << m;
    }
}

TEST(Jacobi, TraceAndPositiveSemidefiniteOnRandomTopologies) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(100);
    const std::size_t m = 1 + rng.uniform_below(100);
    const std::size_t k = 1 + rng.uniform_below(m);
    const auto kind = kSparseConstructions[rng.uniform_below(6)];
    const auto t = build({kind, std::max<std::size_t>(k, kind == ConstructionKind::LongShortRotating ? 2 : 1), rng.next_u64()},
                         n, std::max<std::size_t>(m, 2));
    const auto eig = eigenvalues_symmetric(build_laplacian(t));
    const double sum = std::accumulate(eig.begin(), eig.end(), 0.0);
    const double edges2 = 2.0 * static_cast<double>(t.edge_count());
    EXPECT_NEAR(sum, edges2, 1e-8 * std::max(1.0, edges2));
    EXPECT_GE(eig.front(), -1e-9);
  }
}

TEST(TridiagonalQl, AgreesWithJacobi) {
  Rng rng(5);
  JacobiOptions ql;
  ql.jacobi_max_size = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(40);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform01() * 4.0 - 2.0;
    const auto jac = eigenvalues_symmetric(a);
    const auto tri = eigenvalues_symmetric(a, ql);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(tri[i], jac[i], 1e-10) << "trial " << trial;
  }
}

TEST(TridiagonalQl, CompleteBipartiteClosedForm) {
  JacobiOptions ql;
  ql.jacobi_max_size = 0;
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t m = 1; m <= 12; ++m) {
      const auto eig = eigenvalues_symmetric(build_laplacian(fully_connected(n, m)), ql);
      const auto want = complete_bipartite_spectrum(n, m);
      for (std::size_t i = 0; i < eig.size(); ++i) ASSERT_NEAR(eig[i], want[i], 1e-8) << n << "x" << m;
    }
  // Input-layer size: 784 + 100 vertices.
  const auto eig = eigenvalues_symmetric(build_laplacian(fully_connected(784, 100)));
  const auto want = complete_bipartite_spectrum(784, 100);
  for (std::size_t i = 0; i < eig.size(); ++i) ASSERT_NEAR(eig[i], want[i], 1e-8 * 884) << i;
}

TEST(Spectral, AnalyzeCompleteBipartite) {
  const auto r = analyze(fully_connected(2, 3));
  EXPECT_NEAR(r.algebraic_connectivity_standard, 2.0, 1e-10);
  EXPECT_NEAR(r.largest_nonzero, 5.0, 1e-10);
  EXPECT_NEAR(r.second_largest_nonzero, 3.0, 1e-10);
  EXPECT_EQ(r.component_count, 1u);
  EXPECT_EQ(r.eigenvalues.size(), 5u);
}

TEST(Spectral, AnalyzeEdgeless) {
  const auto r = analyze(from_rows(3, 2, {{}, {}, {}}));
  EXPECT_EQ(r.component_count, 5u);
  EXPECT_EQ(r.algebraic_connectivity_standard, 0.0);
  EXPECT_EQ(r.largest_nonzero, 0.0);
  EXPECT_EQ(r.zero_tolerance, 1e-8);
}

TEST(Spectral, AnalyzeTwoDisjointEdges) {
  const auto r = analyze(from_rows(2, 2, {{0}, {1}}));
  EXPECT_EQ(r.component_count, 2u);
  EXPECT_EQ(r.algebraic_connectivity_standard, 0.0);
  EXPECT_NEAR(r.second_largest_nonzero, 2.0, 1e-12);
}

TEST(Spectral, ReportInvariantsOnRandomTopologies) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(30);
    const std::size_t m = 2 + rng.uniform_below(30);
    const std::size_t k = 1 + rng.uniform_below(3);
    const auto t = random_edge(n, m, std::min(k, m), rng.next_u64());
    const auto r = analyze(t);
    ASSERT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
    EXPECT_LT(std::abs(r.eigenvalues.front()), r.zero_tolerance);
    const auto zeros = std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                     [&](double v) { return v < r.zero_tolerance; });
    EXPECT_EQ(static_cast<std::size_t>(zeros), r.component_count);
    EXPECT_EQ(r.algebraic_connectivity_standard > 0.0, r.component_count == 1);
    std::size_t max_degree = 0;
    for (const auto& row : t.rows) max_degree = std::max(max_degree, row.size());
    for (std::size_t d : t.column_degrees()) max_degree = std::max(max_degree, d);
    EXPECT_LE(r.eigenvalues.back(), 2.0 * static_cast<double>(max_degree) + 1e-9);
  }
}

TEST(Spectral, RegularRotatingConnectivityGrowsWithDegree) {
  double previous = -1.0;
  for (std::size_t k : {2u, 5u, 10u, 25u, 50u}) {
    const double lambda2 = analyze(regular_rotating(50, 50, k)).algebraic_connectivity_standard;
    EXPECT_GE(lambda2, previous - 1e-9) << "k=" << k;
    previous = lambda2;
  }
}

TEST(Spectral, CsvRow) {
  const auto r = analyze(fully_connected(2, 3));
  const auto header = spectral_csv_header();
  const auto row = to_csv_row(r);
  ASSERT_EQ(header.size(), row.size());
  EXPECT_EQ(row[0], "fully_connected");
  EXPECT_EQ(row[3], "3");
  EXPECT_EQ(row[4], "-");
  EXPECT_EQ(row[5], "1");
}

}  // namespace
}  // namespace snn
