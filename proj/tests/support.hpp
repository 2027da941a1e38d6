#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gapbench/cutcone.hpp"
#include "gapbench/heisenberg.hpp"
#include "gapbench/metric.hpp"
#include "gapbench/random.hpp"
#include "gapbench/sparsestcut.hpp"

namespace fixtures {

using gapbench::FiniteMetric;
using gapbench::Rng;

// L1 metric from a random cut decomposition with every pair separated.
inline FiniteMetric random_cut_metric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  gapbench::cutcone::CutDecomposition cd;
  cd.n = n;
  for (std::size_t i = 1; i < n; ++i)
    cd.atoms.push_back({gapbench::cutcone::CutMask{1} << i, 0.05 + rng.uniform()});
  for (int k = 0; k < 6; ++k) {
    const auto s = static_cast<gapbench::cutcone::CutMask>(1 + rng.below((std::uint64_t{1} << n) - 2));
    cd.atoms.push_back({s, rng.uniform()});
  }
  return cd.metric();
}

// Shortest-path closure of random positive edge weights on K_n.
inline FiniteMetric random_metric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = 0.1 + rng.uniform();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  return FiniteMetric(n, std::move(d));
}

// rho on n random points of [-2, 2]^3: negative type by the embedding theorem for rho.
inline FiniteMetric random_rho_metric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<gapbench::heis::HPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
  return gapbench::heis::metric_on(pts).metric;
}

// Squared Euclidean distances of points on the unit sphere in R^m, redrawn until
// the triangle inequality holds. Negative type by construction; c1 can exceed 1.
inline FiniteMetric sphere_sq_metric(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    std::vector<double> x(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        x[i * m + a] = rng.uniform(-1, 1);
        s += x[i * m + a] * x[i * m + a];
      }
      for (std::size_t a = 0; a < m; ++a) x[i * m + a] /= std::sqrt(s);
    }
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) d[i * n + j] += (x[i * m + a] - x[j * m + a]) * (x[i * m + a] - x[j * m + a]);
    FiniteMetric f(n, std::move(d));
    if (gapbench::check_metric(f).empty()) return f;
  }
}

inline gapbench::sparsest::DemandInstance random_instance(std::size_t n, std::uint64_t seed, double sparsity = 0.3) {
  Rng rng(seed);
  std::vector<double> c(n * n, 0.0), d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      c[i * n + j] = c[j * n + i] = rng.uniform() < sparsity ? 0.0 : rng.uniform();
      d[i * n + j] = d[j * n + i] = rng.uniform() < sparsity ? 0.0 : rng.uniform();
    }
  d[1] = d[n] = 0.5 + rng.uniform();
  return {n, std::move(c), std::move(d)};
}

// Shortest-path metric of K_{2,3}: parts {0,1} and {2,3,4}.
inline FiniteMetric k23() {
  std::vector<std::vector<double>> rows(5, std::vector<double>(5, 0.0));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      const bool si = i < 2, sj = j < 2;
      rows[i][j] = si == sj ? 2.0 : 1.0;
    }
  return FiniteMetric::from_rows(rows);
}

// Unit 4-cycle 0-1-2-3-0 with uniform demands.
inline gapbench::sparsest::DemandInstance four_cycle() {
  return gapbench::sparsest::uniform_instance_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

}  // namespace fixtures
