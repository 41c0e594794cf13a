#pragma once

// Laplacian spectra of bipartite topologies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "snn/csv.hpp"
#include "snn/error.hpp"
#include "snn/linalg.hpp"
#include "snn/topology.hpp"

namespace snn {

// L = D - A over the union graph: left vertices 0..n-1, right vertices n..n+m-1.
inline DenseMatrix build_laplacian(const BipartiteTopology& t) {
  const std::size_t size = t.n + t.m;
  DenseMatrix lap(size, size);
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::uint32_t j : t.rows[i]) {
      const std::size_t r = t.n + j;
      lap(i, r) = -1.0;
      lap(r, i) = -1.0;
      lap(i, i) += 1.0;
      lap(r, r) += 1.0;
    }
  }
  return lap;
}

struct JacobiOptions {
  double relative_tolerance = 1e-12;  // stop when off(A) <= tol * ||A||_F
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-12;
  // Larger matrices go through Householder tridiagonalization and implicit
  // QL instead; Jacobi's column updates are too slow past a few hundred rows.
  std::size_t jacobi_max_size = 128;
};

namespace detail {

// Householder reduction to tridiagonal form (lower triangle of `a` is used and
// destroyed), then QL with implicit Wilkinson shifts on (d, e).
inline std::vector<double> tridiagonal_ql_eigenvalues(DenseMatrix a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> d(n), e(n, 0.0);
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = a(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
  }
  for (int i = 0; i < n; ++i) d[i] = a(i, i);

  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == 60) throw Error(ErrorCode::NoConvergence, "tridiagonal QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace detail

// All eigenvalues of a symmetric matrix, ascending. Up to
// opts.jacobi_max_size rows this is the cyclic Jacobi method, each sweep
// visiting every (p, q) pair above the diagonal once.
inline std::vector<double> eigenvalues_symmetric(const DenseMatrix& input, const JacobiOptions& opts = {}) {
  if (input.rows() != input.cols())
    throw Error(ErrorCode::DimensionMismatch, "eigenvalues_symmetric needs a square matrix");
  const std::size_t n = input.rows();
  if (n == 0) return {};

  double scale = 0.0;
  for (double v : input.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > opts.symmetry_tolerance * std::max(1.0, scale))
        throw Error(ErrorCode::NotSymmetric, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                                 ") differs from its transpose");

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));

  if (n > opts.jacobi_max_size) return detail::tridiagonal_ql_eigenvalues(std::move(a));

  double frobenius_sq = 0.0;
  for (double v : a.data()) frobenius_sq += v * v;
  const double target = opts.relative_tolerance * std::sqrt(frobenius_sq);

  auto off_diagonal_norm = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
  };

  int sweep = 0;
  for (; sweep <= opts.max_sweeps; ++sweep) {
    if (off_diagonal_norm() <= target) break;
    if (sweep == opts.max_sweeps)
      throw Error(ErrorCode::NoConvergence,
                  "Jacobi did not converge in " + std::to_string(opts.max_sweeps) + " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rutishauser's stable rotation: t = tan(theta) with |theta| <= pi/4.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        auto row_p = a.row(p);
        auto row_q = a.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = row_p[r];
          const double arq = row_q[r];
          const double new_rp = arp - s * (arq + tau * arp);
          const double new_rq = arq + s * (arp - tau * arq);
          row_p[r] = new_rp;
          row_q[r] = new_rq;
          a(r, p) = new_rp;
          a(r, q) = new_rq;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

struct SpectralReport {
  ConstructionSpec construction;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> eigenvalues;  // ascending, n + m entries
  double algebraic_connectivity_standard = 0.0;  // lambda_2, clamped to 0 below tolerance
  double largest_nonzero = 0.0;
  double second_largest_nonzero = 0.0;
  std::size_t component_count = 0;
  double zero_tolerance = 0.0;
};

// Eigenvalue-derived metrics. "Second largest" counts multiplicity: it is
// the next entry below the top of the ascending list.
inline SpectralReport analyze_spectrum(std::vector<double> eigenvalues) {
  SpectralReport report;
  std::sort(eigenvalues.begin(), eigenvalues.end());
  const double largest = eigenvalues.empty() ? 0.0 : eigenvalues.back();
  report.zero_tolerance = 1e-8 * (largest > 0.0 ? largest : 1.0);
  const double tol = report.zero_tolerance;
  for (double v : eigenvalues)
    if (v < tol) ++report.component_count;
  if (eigenvalues.size() >= 2 && eigenvalues[1] >= tol) report.algebraic_connectivity_standard = eigenvalues[1];
  if (largest >= tol) report.largest_nonzero = largest;
  if (eigenvalues.size() >= 2 && eigenvalues[eigenvalues.size() - 2] >= tol)
    report.second_largest_nonzero = eigenvalues[eigenvalues.size() - 2];
  report.eigenvalues = std::move(eigenvalues);
  return report;
}

inline SpectralReport analyze(const BipartiteTopology& t, const JacobiOptions& opts = {}) {
  auto report = analyze_spectrum(eigenvalues_symmetric(build_laplacian(t), opts));
  report.construction = t.spec();
  report.n = t.n;
  report.m = t.m;
  return report;
}

inline std::vector<std::string> spectral_csv_header() {
  return {"construction", "n", "m", "k", "seed", "component_count", "lambda2", "second_largest_nonzero",
          "largest_nonzero"};
}

inline std::vector<std::string> to_csv_row(const SpectralReport& r) {
  return {std::string(to_string(r.construction.kind)),
          std::to_string(r.n),
          std::to_string(r.m),
          std::to_string(r.construction.k),
          r.construction.seed ? std::to_string(*r.construction.seed) : std::string("-"),
          std::to_string(r.component_count),
          csv::format(r.algebraic_connectivity_standard),
          csv::format(r.second_largest_nonzero),
          csv::format(r.largest_nonzero)};
}

}  // namespace snn
