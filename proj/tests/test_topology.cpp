#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "snn/topology.hpp"

namespace snn {
namespace {

using Rows = std::vector<std::vector<std::uint32_t>>;

// Reference enumeration of the offset rules, written against std::set so it
// shares no code with the bitmap/probing implementation.
std::set<std::size_t> probe_into(std::set<std::size_t> taken, std::size_t candidate, std::size_t m) {
  std::size_t slot = candidate % m;
  while (taken.count(slot)) slot = (slot + 1) % m;
  taken.insert(slot);
  return taken;
}

std::set<std::size_t> reference_long_short(std::size_t m, std::size_t k) {
  const std::size_t h = (k + 1) / 2, l = k / 2;
  std::set<std::size_t> s;
  for (std::size_t i = 0; i < h; ++i) s = probe_into(s, i, m);
  for (std::size_t t = 0; t < l; ++t) s = probe_into(s, h + (t * (m - h)) / l, m);
  return s;
}

std::set<std::size_t> reference_fibonacci(std::size_t m, std::size_t k) {
  std::vector<long double> f{1, 1};
  while (f.size() < k) f.push_back(f[f.size() - 1] + f[f.size() - 2]);
  std::set<std::size_t> s{0};
  for (std::size_t i = 1; i < k; ++i) {
    const auto c = f[k - 1] < m ? static_cast<std::size_t>(f[i])
                                : static_cast<std::size_t>(std::floor(f[i] * m / f[k - 1]));
    s = probe_into(s, c, m);
  }
  return s;
}

std::vector<std::uint32_t> as_row(const std::set<std::size_t>& s) { return {s.begin(), s.end()}; }

TEST(Topology, FullyConnectedIsComplete) {
  const auto t = build({ConstructionKind::FullyConnected, 0, std::nullopt}, 2, 3);
  EXPECT_EQ(t.rows, (Rows{{0, 1, 2}, {0, 1, 2}}));
  EXPECT_EQ(t.k, 3u);
  EXPECT_DOUBLE_EQ(density(t), 1.0);
}

TEST(Topology, FullyConnectedClampsRequestedDegree) {
  const auto t = build({ConstructionKind::FullyConnected, 99, std::nullopt}, 2, 3);
  EXPECT_EQ(t.k, 3u);
  EXPECT_EQ(t.edge_count(), 6u);
}

TEST(Topology, RegularRotatingRule) {
  EXPECT_EQ(regular_rotating(3, 4, 2).rows, (Rows{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(regular_rotating(2, 3, 3).rows, (Rows{{0, 1, 2}, {0, 1, 2}}));
  EXPECT_EQ(regular_rotating(4, 4, 2).rows[3], (std::vector<std::uint32_t>{0, 3}));
  EXPECT_DOUBLE_EQ(density(regular_rotating(3, 4, 2)), 0.5);
}

TEST(Topology, BuildDispatchesRegularRotating) {
  const auto t = build({ConstructionKind::RegularRotating, 2, std::nullopt}, 3, 4);
  EXPECT_EQ(t.rows, (Rows{{0, 1}, {1, 2}, {2, 3}}));
}

TEST(Topology, DensityOfEmptyRows) {
  const auto t = from_rows(2, 3, Rows{{}, {}});
  EXPECT_EQ(density(t), 0.0);
}

TEST(Topology, RandomEdgeEdgeCountConcentrates) {
  const auto small = build({ConstructionKind::RandomEdge, 5, 7}, 100, 100);
  EXPECT_GE(small.edge_count(), 300u);
  EXPECT_LE(small.edge_count(), 700u);

  // 4 sigma band around n*k = 15000 with sigma = sqrt(150000 * 0.1 * 0.9).
  const auto big = random_edge(500, 300, 30, 42);
  EXPECT_GE(big.edge_count(), 14526u);
  EXPECT_LE(big.edge_count(), 15474u);
}

TEST(Topology, RandomEdgeFullProbabilityIsComplete) {
  const auto t = random_edge(3, 5, 5, 1);
  EXPECT_EQ(t, [] {
    auto full = fully_connected(3, 5);
    full.kind = ConstructionKind::RandomEdge;
    full.k = 5;
    full.seed = 1;
    return full;
  }());
}

TEST(Topology, RandomEdgeDeterministicForSeed) {
  EXPECT_EQ(random_edge(1, 4, 2, 99), random_edge(1, 4, 2, 99));
  EXPECT_LE(random_edge(1, 4, 2, 99).edge_count(), 4u);
}

TEST(Topology, RandomEdgeMeanOverSeeds) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) total += static_cast<double>(random_edge(50, 50, 10, seed).edge_count());
  EXPECT_NEAR(total / 200.0, 500.0, 10.0);
}

TEST(Topology, RandomRotatingWithFullDegree) {
  const auto t = random_rotating(3, 3, 3, 12345);
  for (const auto& row : t.rows) EXPECT_EQ(row, (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(Topology, RotationOfAGivenBaseSet) {
  EXPECT_EQ(rotating_topology(2, 4, {2}).rows, (Rows{{2}, {3}}));
}

TEST(Topology, SquareRotationIsColumnRegularForEveryBaseSet) {
  // All C(4,2) base sets for n = m = 4.
  for (std::uint32_t a = 0; a < 4; ++a)
    for (std::uint32_t b = a + 1; b < 4; ++b) {
      const auto t = rotating_topology(4, 4, {a, b}, ConstructionKind::RandomRotating);
      for (std::size_t d : t.column_degrees()) EXPECT_EQ(d, 2u);
    }
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (std::size_t d : random_rotating(4, 4, 2, seed).column_degrees()) EXPECT_EQ(d, 2u);
}

TEST(Topology, RandomRotatingBaseSetIsUniform) {
  // Six possible 2-subsets of [0,4); each should appear about 1/6 of the time.
  std::map<std::vector<std::uint32_t>, int> counts;
  for (std::uint64_t seed = 0; seed < 6000; ++seed) ++counts[random_rotating(1, 4, 2, seed).rows[0]];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [base, count] : counts) {
    EXPECT_GT(count, 850);
    EXPECT_LT(count, 1150);
  }
}

TEST(Topology, RandomDRegularSmallCases) {
  const auto full = random_d_regular(5, 3, 3, 8);
  for (const auto& row : full.rows) EXPECT_EQ(row, (std::vector<std::uint32_t>{0, 1, 2}));
  for (const auto& row : random_d_regular(3, 8, 4, 17).rows) EXPECT_EQ(row.size(), 4u);
}

TEST(Topology, RandomDRegularColumnDegreeSpread) {
  const auto t = random_d_regular(200, 100, 10, 1);
  const auto deg = t.column_degrees();
  const double mean = std::accumulate(deg.begin(), deg.end(), 0.0) / 100.0;
  EXPECT_DOUBLE_EQ(mean, 20.0);
  double sq = 0.0;
  for (std::size_t d : deg) sq += (static_cast<double>(d) - mean) * (static_cast<double>(d) - mean);
  const double sd = std::sqrt(sq / 100.0);
  EXPECT_GE(sd, 2.5);
  EXPECT_LE(sd, 6.5);
}

TEST(Topology, LongShortOffsets) {
  EXPECT_EQ(long_short_rotating(1, 8, 4).rows[0], (std::vector<std::uint32_t>{0, 1, 2, 5}));
  EXPECT_EQ(long_short_rotating(2, 4, 4).rows, (Rows{{0, 1, 2, 3}, {0, 1, 2, 3}}));
  // ceil(2/2) = 1 short offset {0}; one long offset 1 + 0 = 1.
  EXPECT_EQ(long_short_offsets(6, 2), as_row(reference_long_short(6, 2)));
  EXPECT_EQ(long_short_offsets(6, 2), (std::vector<std::uint32_t>{0, 1}));
}

TEST(Topology, LongShortRejectsDegreeOne) {
  try {
    long_short_rotating(3, 5, 1);
    FAIL() << "expected invalid-degree";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDegree);
  }
}

TEST(Topology, LongShortMatchesReferenceEnumeration) {
  for (std::size_t m = 2; m <= 40; ++m)
    for (std::size_t k = 2; k <= m; ++k) ASSERT_EQ(long_short_offsets(m, k), as_row(reference_long_short(m, k))) << m << ' ' << k;
}

TEST(Topology, FibonacciOffsets) {
  // Offset 0 takes F_1; F_2..F_5 = 1, 2, 3, 5 fill the rest.
  EXPECT_EQ(fibonacci_rotating(1, 16, 5).rows[0], (std::vector<std::uint32_t>{0, 1, 2, 3, 5}));
  EXPECT_EQ(fibonacci_rotating(2, 3, 3).rows, (Rows{{0, 1, 2}, {0, 1, 2}}));
  EXPECT_EQ(fibonacci_rotating(1, 10, 8).rows[0].size(), 8u);
}

TEST(Topology, FibonacciMatchesReferenceEnumeration) {
  for (std::size_t m = 1; m <= 120; ++m)
    for (std::size_t k = 1; k <= std::min<std::size_t>(m, 80); ++k)
      ASSERT_EQ(fibonacci_offsets(m, k), as_row(reference_fibonacci(m, k))) << m << ' ' << k;
}

TEST(Topology, FibonacciLargeDegreeStillExact) {
  // k beyond the 64-bit Fibonacci range takes the floating-point path.
  for (std::size_t k : {94u, 150u, 300u, 784u}) EXPECT_EQ(fibonacci_offsets(784, k).size(), k);
}

TEST(Topology, ErrorsOnInvalidDegreeAndMissingSeed) {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;  // sentinel: nothing thrown
  };
  EXPECT_EQ(code_of([] { build({ConstructionKind::RegularRotating, 0, std::nullopt}, 3, 4); }), ErrorCode::InvalidDegree);
  EXPECT_EQ(code_of([] { build({ConstructionKind::RegularRotating, 5, std::nullopt}, 3, 4); }), ErrorCode::InvalidDegree);
  EXPECT_EQ(code_of([] { build({ConstructionKind::RandomEdge, 2, std::nullopt}, 3, 4); }), ErrorCode::MissingSeed);
  EXPECT_EQ(code_of([] { build({ConstructionKind::RandomDRegular, 2, std::nullopt}, 3, 4); }), ErrorCode::MissingSeed);
  EXPECT_EQ(code_of([] { build({ConstructionKind::RandomRotating, 9, 1}, 3, 4); }), ErrorCode::InvalidDegree);
}

TEST(Topology, DegreeEqualToWidthIsCompleteForEveryKind) {
  for (ConstructionKind kind : kAllConstructions) {
    const auto t = build({kind, 6, 3}, 5, 6);
    EXPECT_EQ(t.edge_count(), 30u) << to_string(kind);
  }
}

// Randomised invariant sweep over (n, m, k, seed) for every construction.
TEST(Topology, InvariantSweep) {
  Rng pick(2024);
  int cases = 0;
  while (cases < 600) {
    const std::size_t n = 1 + pick.uniform_below(40);
    const std::size_t m = 2 + pick.uniform_below(40);
    const std::size_t k = 2 + pick.uniform_below(m - 1);
    const std::uint64_t seed = pick.next_u64();
    for (ConstructionKind kind : kAllConstructions) {
      const ConstructionSpec spec{kind, k, seed};
      const auto t = build(spec, n, m);
      ASSERT_NO_THROW(validate(t));
      ASSERT_EQ(t, build(spec, n, m));
      if (kind != ConstructionKind::RandomEdge && kind != ConstructionKind::FullyConnected)
        for (const auto& row : t.rows) ASSERT_EQ(row.size(), k);
      if (is_rotating(kind)) {
        for (std::size_t i = 0; i < n; ++i) {
          std::set<std::uint32_t> shifted;
          for (std::uint32_t j : t.rows[0]) shifted.insert(static_cast<std::uint32_t>((j + i) % m));
          ASSERT_EQ(std::vector<std::uint32_t>(shifted.begin(), shifted.end()), t.rows[i]);
        }
      }
      ++cases;
    }
  }
}

TEST(Topology, EdgeListRoundTrip) {
  for (const auto& t : {random_edge(7, 9, 3, 5), fibonacci_rotating(4, 10, 6), fully_connected(2, 2)}) {
    std::stringstream ss;
    write_edge_list(ss, t);
    EXPECT_EQ(read_edge_list(ss), t);
  }
}

TEST(Topology, EdgeListFormat) {
  std::stringstream ss;
  write_edge_list(ss, regular_rotating(2, 3, 2));
  EXPECT_EQ(ss.str(), "2 3 regular_rotating 2 -\n0 0\n0 1\n1 1\n1 2\n");
}

TEST(Topology, EdgeListRejectsOutOfRangeEdge) {
  std::stringstream ss("2 2 random_edge 1 4\n0 5\n");
  EXPECT_THROW(read_edge_list(ss), Error);
}

}  // namespace
}  // namespace snn
