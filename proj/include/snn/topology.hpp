#pragma once

// Bipartite connection topologies between two consecutive layers.
//
// A topology is the n x m adjacency of the left layer (n neurons) against the
// right layer (m neurons), stored row by row: rows[i] lists the right-layer
// neurons that left neuron i connects to, strictly ascending.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "snn/error.hpp"
#include "snn/rng.hpp"

namespace snn {

enum class ConstructionKind {
  RandomEdge,
  RandomRotating,
  RandomDRegular,
  RegularRotating,
  LongShortRotating,
  FibonacciRotating,
  FullyConnected,
};

inline constexpr ConstructionKind kAllConstructions[] = {
    ConstructionKind::RandomEdge,        ConstructionKind::RandomRotating,
    ConstructionKind::RandomDRegular,    ConstructionKind::RegularRotating,
    ConstructionKind::LongShortRotating, ConstructionKind::FibonacciRotating,
    ConstructionKind::FullyConnected,
};

inline constexpr ConstructionKind kSparseConstructions[] = {
    ConstructionKind::RandomEdge,      ConstructionKind::RandomRotating,
    ConstructionKind::RandomDRegular,  ConstructionKind::RegularRotating,
    ConstructionKind::LongShortRotating, ConstructionKind::FibonacciRotating,
};

inline std::string_view to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::RandomEdge: return "random_edge";
    case ConstructionKind::RandomRotating: return "random_rotating";
    case ConstructionKind::RandomDRegular: return "random_d_regular";
    case ConstructionKind::RegularRotating: return "regular_rotating";
    case ConstructionKind::LongShortRotating: return "long_short_rotating";
    case ConstructionKind::FibonacciRotating: return "fibonacci_rotating";
    case ConstructionKind::FullyConnected: return "fully_connected";
  }
  return "unknown";
}

inline ConstructionKind parse_construction(std::string_view name) {
  for (ConstructionKind kind : kAllConstructions) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::Parse, "unknown construction '" + std::string(name) + "'");
}

constexpr bool is_random(ConstructionKind kind) noexcept {
  return kind == ConstructionKind::RandomEdge || kind == ConstructionKind::RandomRotating ||
         kind == ConstructionKind::RandomDRegular;
}

constexpr bool is_rotating(ConstructionKind kind) noexcept {
  return kind == ConstructionKind::RandomRotating || kind == ConstructionKind::RegularRotating ||
         kind == ConstructionKind::LongShortRotating || kind == ConstructionKind::FibonacciRotating;
}

struct ConstructionSpec {
  ConstructionKind kind = ConstructionKind::FullyConnected;
  std::size_t k = 0;  // ignored for FullyConnected
  std::optional<std::uint64_t> seed;

  friend bool operator==(const ConstructionSpec&, const ConstructionSpec&) = default;
};

struct BipartiteTopology {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::vector<std::uint32_t>> rows;
  ConstructionKind kind = ConstructionKind::FullyConnected;
  std::size_t k = 0;
  std::optional<std::uint64_t> seed;

  std::size_t edge_count() const noexcept {
    std::size_t total = 0;
    for (const auto& row : rows) total += row.size();
    return total;
  }

  // Right-layer degrees.
  std::vector<std::size_t> column_degrees() const {
    std::vector<std::size_t> degree(m, 0);
    for (const auto& row : rows)
      for (std::uint32_t j : row) ++degree[j];
    return degree;
  }

  ConstructionSpec spec() const { return {kind, k, seed}; }

  friend bool operator==(const BipartiteTopology&, const BipartiteTopology&) = default;
};

inline double density(const BipartiteTopology& t) noexcept {
  if (t.n == 0 || t.m == 0) return 0.0;
  return static_cast<double>(t.edge_count()) / (static_cast<double>(t.n) * static_cast<double>(t.m));
}

// Throws InvalidArgument unless every row is strictly ascending within [0, m).
inline void validate(const BipartiteTopology& t) {
  if (t.rows.size() != t.n)
    throw Error(ErrorCode::InvalidArgument, "topology has " + std::to_string(t.rows.size()) +
                                                " rows, expected " + std::to_string(t.n));
  for (std::size_t i = 0; i < t.n; ++i) {
    const auto& row = t.rows[i];
    for (std::size_t e = 0; e < row.size(); ++e) {
      if (row[e] >= t.m)
        throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " has column " +
                                                    std::to_string(row[e]) + " >= m");
      if (e > 0 && row[e] <= row[e - 1])
        throw Error(ErrorCode::InvalidArgument,
                    "row " + std::to_string(i) + " is not strictly ascending");
    }
  }
}

namespace detail {

inline void check_dims(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
}

inline void check_degree(std::size_t k, std::size_t m, std::size_t min_k = 1) {
  if (k < min_k || k > m)
    throw Error(ErrorCode::InvalidDegree, "k=" + std::to_string(k) + " outside [" +
                                              std::to_string(min_k) + ", " + std::to_string(m) + "]");
}

inline BipartiteTopology empty_topology(std::size_t n, std::size_t m, ConstructionKind kind,
                                        std::size_t k, std::optional<std::uint64_t> seed) {
  BipartiteTopology t;
  t.n = n;
  t.m = m;
  t.rows.resize(n);
  t.kind = kind;
  t.k = k;
  t.seed = seed;
  return t;
}

// Inserts `candidate mod m` into the occupancy bitmap, probing forward
// (mod m) past occupied slots. Caller guarantees a free slot exists.
inline std::size_t insert_probing(std::vector<bool>& occupied, std::size_t candidate) {
  const std::size_t m = occupied.size();
  std::size_t slot = candidate % m;
  while (occupied[slot]) slot = (slot + 1) % m;
  occupied[slot] = true;
  return slot;
}

inline std::vector<std::uint32_t> offsets_from_bitmap(const std::vector<bool>& occupied) {
  std::vector<std::uint32_t> offsets;
  for (std::size_t j = 0; j < occupied.size(); ++j)
    if (occupied[j]) offsets.push_back(static_cast<std::uint32_t>(j));
  return offsets;
}

// Moves a uniformly random k-subset of `pool` into pool[0..k). The pool may
// arrive in any order; partial Fisher-Yates stays uniform regardless.
inline void partial_shuffle(std::vector<std::uint32_t>& pool, std::size_t k, Rng& rng) {
  const std::size_t m = pool.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_below(m - i));
    std::swap(pool[i], pool[j]);
  }
}

}  // namespace detail

// Row i = {(s + i) mod m : s in base}. `base` must hold distinct offsets < m.
inline BipartiteTopology rotating_topology(std::size_t n, std::size_t m,
                                           const std::vector<std::uint32_t>& base,
                                           ConstructionKind kind = ConstructionKind::RegularRotating,
                                           std::optional<std::uint64_t> seed = std::nullopt) {
  detail::check_dims(n, m);
  auto t = detail::empty_topology(n, m, kind, base.size(), seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = t.rows[i];
    row.reserve(base.size());
    for (std::uint32_t s : base) row.push_back(static_cast<std::uint32_t>((s + i) % m));
    std::sort(row.begin(), row.end());
  }
  validate(t);
  return t;
}

inline BipartiteTopology fully_connected(std::size_t n, std::size_t m) {
  detail::check_dims(n, m);
  auto t = detail::empty_topology(n, m, ConstructionKind::FullyConnected, m, std::nullopt);
  std::vector<std::uint32_t> all(m);
  std::iota(all.begin(), all.end(), 0u);
  for (auto& row : t.rows) row = all;
  return t;
}

// Each of the n*m edges is present independently with probability k/m.
inline BipartiteTopology random_edge(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
  detail::check_dims(n, m);
  detail::check_degree(k, m);
  auto t = detail::empty_topology(n, m, ConstructionKind::RandomEdge, k, seed);
  const double p = static_cast<double>(k) / static_cast<double>(m);
  Rng rng(seed);
  for (auto& row : t.rows) {
    for (std::size_t j = 0; j < m; ++j)
      if (rng.bernoulli(p)) row.push_back(static_cast<std::uint32_t>(j));
  }
  return t;
}

// A uniformly random k-subset of offsets, rotated by one per row.
inline BipartiteTopology random_rotating(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
  detail::check_dims(n, m);
  detail::check_degree(k, m);
  Rng rng(seed);
  std::vector<std::uint32_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0u);
  detail::partial_shuffle(pool, k, rng);
  std::vector<std::uint32_t> base(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(base.begin(), base.end());
  return rotating_topology(n, m, base, ConstructionKind::RandomRotating, seed);
}

// Every left vertex draws exactly k distinct right neighbours, independently.
inline BipartiteTopology random_d_regular(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
  detail::check_dims(n, m);
  detail::check_degree(k, m);
  auto t = detail::empty_topology(n, m, ConstructionKind::RandomDRegular, k, seed);
  Rng rng(seed);
  std::vector<std::uint32_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0u);
  for (auto& row : t.rows) {
    detail::partial_shuffle(pool, k, rng);
    row.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(row.begin(), row.end());
  }
  return t;
}

// Offsets {0, ..., k-1}: k ones followed by m-k zeros, rotated per row.
inline std::vector<std::uint32_t> regular_rotating_offsets(std::size_t m, std::size_t k) {
  detail::check_degree(k, m);
  std::vector<std::uint32_t> base(k);
  std::iota(base.begin(), base.end(), 0u);
  return base;
}

inline BipartiteTopology regular_rotating(std::size_t n, std::size_t m, std::size_t k) {
  detail::check_dims(n, m);
  return rotating_topology(n, m, regular_rotating_offsets(m, k), ConstructionKind::RegularRotating);
}

// ceil(k/2) contiguous short offsets, then floor(k/2) long offsets spread
// evenly over the remaining m - ceil(k/2) positions.
inline std::vector<std::uint32_t> long_short_offsets(std::size_t m, std::size_t k) {
  detail::check_degree(k, m, 2);
  const std::size_t short_count = (k + 1) / 2;
  const std::size_t long_count = k / 2;
  std::vector<bool> occupied(m, false);
  for (std::size_t s = 0; s < short_count; ++s) detail::insert_probing(occupied, s);
  for (std::size_t t = 0; t < long_count; ++t)
    detail::insert_probing(occupied, short_count + t * (m - short_count) / long_count);
  return detail::offsets_from_bitmap(occupied);
}

inline BipartiteTopology long_short_rotating(std::size_t n, std::size_t m, std::size_t k) {
  detail::check_dims(n, m);
  return rotating_topology(n, m, long_short_offsets(m, k), ConstructionKind::LongShortRotating);
}

// Offset 0 stands in for the first Fibonacci number; F_2..F_k follow, either
// raw (F_k < m) or scaled by m / F_k and truncated. Collisions probe forward.
inline std::vector<std::uint32_t> fibonacci_offsets(std::size_t m, std::size_t k) {
  detail::check_degree(k, m);
  std::vector<bool> occupied(m, false);
  detail::insert_probing(occupied, 0);
  if (k == 1) return detail::offsets_from_bitmap(occupied);

  // F_93 is the last Fibonacci number representable in 64 bits.
  constexpr std::size_t kExactLimit = 93;
  if (k <= kExactLimit) {
    std::vector<std::uint64_t> fib(k);
    fib[0] = 1;
    fib[1] = 1;
    for (std::size_t i = 2; i < k; ++i) fib[i] = fib[i - 1] + fib[i - 2];
    const std::uint64_t fk = fib[k - 1];
    for (std::size_t i = 1; i < k; ++i) {
      std::uint64_t candidate = fib[i];
      if (fk >= m) {
        const auto scaled = static_cast<unsigned __int128>(fib[i]) * m / fk;
        candidate = static_cast<std::uint64_t>(scaled);
      }
      detail::insert_probing(occupied, static_cast<std::size_t>(candidate % m));
    }
  } else {
    // F_k >= m here; only the ratio F_i / F_k matters.
    std::vector<double> fib(k);
    fib[0] = 1.0;
    fib[1] = 1.0;
    for (std::size_t i = 2; i < k; ++i) fib[i] = fib[i - 1] + fib[i - 2];
    for (std::size_t i = 1; i < k; ++i) {
      const double scaled = std::floor(fib[i] / fib[k - 1] * static_cast<double>(m));
      detail::insert_probing(occupied, static_cast<std::size_t>(scaled) % m);
    }
  }
  return detail::offsets_from_bitmap(occupied);
}

inline BipartiteTopology fibonacci_rotating(std::size_t n, std::size_t m, std::size_t k) {
  detail::check_dims(n, m);
  return rotating_topology(n, m, fibonacci_offsets(m, k), ConstructionKind::FibonacciRotating);
}

inline BipartiteTopology build(const ConstructionSpec& spec, std::size_t n, std::size_t m) {
  detail::check_dims(n, m);
  if (spec.kind == ConstructionKind::FullyConnected) return fully_connected(n, m);
  if (is_random(spec.kind) && !spec.seed)
    throw Error(ErrorCode::MissingSeed, std::string(to_string(spec.kind)) + " needs a seed");
  switch (spec.kind) {
    case ConstructionKind::RandomEdge: return random_edge(n, m, spec.k, *spec.seed);
    case ConstructionKind::RandomRotating: return random_rotating(n, m, spec.k, *spec.seed);
    case ConstructionKind::RandomDRegular: return random_d_regular(n, m, spec.k, *spec.seed);
    case ConstructionKind::RegularRotating: return regular_rotating(n, m, spec.k);
    case ConstructionKind::LongShortRotating: return long_short_rotating(n, m, spec.k);
    case ConstructionKind::FibonacciRotating: return fibonacci_rotating(n, m, spec.k);
    case ConstructionKind::FullyConnected: break;
  }
  return fully_connected(n, m);
}

// Builds a topology from explicit rows (file loading, hand-made fixtures).
inline BipartiteTopology from_rows(std::size_t n, std::size_t m, std::vector<std::vector<std::uint32_t>> rows,
                                   ConstructionSpec tag = {}) {
  BipartiteTopology t;
  t.n = n;
  t.m = m;
  t.rows = std::move(rows);
  t.kind = tag.kind;
  t.k = tag.k;
  t.seed = tag.seed;
  validate(t);
  return t;
}

// Edge-list text format:
//   n m construction k seed        ("-" when no seed)
//   i j                            (one line per edge, row-major)
inline void write_edge_list(std::ostream& out, const BipartiteTopology& t) {
  out << t.n << ' ' << t.m << ' ' << to_string(t.kind) << ' ' << t.k << ' ';
  if (t.seed)
    out << *t.seed;
  else
    out << '-';
  out << '\n';
  for (std::size_t i = 0; i < t.n; ++i)
    for (std::uint32_t j : t.rows[i]) out << i << ' ' << j << '\n';
}

inline BipartiteTopology read_edge_list(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::Truncated, "edge list is empty");
  std::istringstream hs(header);
  std::size_t n = 0, m = 0, k = 0;
  std::string kind_name, seed_text;
  if (!(hs >> n >> m >> kind_name >> k >> seed_text))
    throw Error(ErrorCode::Parse, "bad edge-list header '" + header + "'");
  ConstructionSpec tag{parse_construction(kind_name), k, std::nullopt};
  if (seed_text != "-") {
    try {
      tag.seed = std::stoull(seed_text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "bad seed '" + seed_text + "'");
    }
  }
  std::vector<std::vector<std::uint32_t>> rows(n);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::size_t i = 0, j = 0;
    if (!(ls >> i >> j)) throw Error(ErrorCode::Parse, "bad edge on line " + std::to_string(line_no));
    if (i >= n || j >= m)
      throw Error(ErrorCode::InvalidArgument, "edge out of range on line " + std::to_string(line_no));
    rows[i].push_back(static_cast<std::uint32_t>(j));
  }
  for (auto& row : rows) std::sort(row.begin(), row.end());
  return from_rows(n, m, std::move(rows), tag);
}

}  // namespace snn
