#include "gapbench/sparsestcut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "gapbench/errors.hpp"
#include "gapbench/random.hpp"

namespace gapbench::sparsest {

namespace {

void validate_matrix(const std::vector<double>& m, std::size_t n, const char* name) {
  if (m.size() != n * n) throw StructuralError(std::string(name) + " matrix is not n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i * n + i] != 0.0) throw StructuralError(std::string(name) + " matrix has a nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m[i * n + j];
      if (!std::isfinite(v) || v < 0.0) throw StructuralError(std::string(name) + " matrix has a negative entry");
      if (std::abs(v - m[j * n + i]) > 1e-12 * std::max(1.0, std::abs(v)))
        throw StructuralError(std::string(name) + " matrix is not symmetric");
    }
  }
}

}  // namespace

DemandInstance::DemandInstance(std::size_t n, std::vector<double> capacities, std::vector<double> demands)
    : n_(n), c_(std::move(capacities)), d_(std::move(demands)) {
  if (n_ < 2) throw StructuralError("instance needs at least two points");
  validate_matrix(c_, n_, "capacity");
  validate_matrix(d_, n_, "demand");
  if (std::none_of(d_.begin(), d_.end(), [](double v) { return v > 0.0; }))
    throw StructuralError("demand matrix has no positive entry");
}

DemandInstance DemandInstance::scaled(double alpha, double beta) const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("instance scale factors must be positive");
  auto c = c_;
  auto d = d_;
  for (auto& v : c) v *= alpha;
  for (auto& v : d) v *= beta;
  return DemandInstance(n_, std::move(c), std::move(d));
}

std::optional<double> phi(CutMask s, const DemandInstance& inst) {
  const std::size_t n = inst.size();
  const CutMask full = (n >= 32) ? ~CutMask{0} : ((CutMask{1} << n) - 1);
  if ((s & full) == 0 || (s & full) == full) throw DomainError("cut must be a proper nonempty subset");
  double cap = 0.0, dem = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cutcone::crosses(s, i, j)) {
        cap += inst.c(i, j);
        dem += inst.d(i, j);
      }
  if (!(dem > 0.0)) return std::nullopt;
  return cap / dem;
}

namespace {

constexpr std::uint64_t kRefresh = 4096;

// Scans canonical cuts whose free part (points 1..n-1) has Gray-code rank in
// [lo, hi). Returns the best (value, mask) with smallest-mask tie-breaking.
std::pair<double, CutMask> scan_range(const DemandInstance& inst, std::uint64_t lo, std::uint64_t hi) {
  const std::size_t n = inst.size();
  const CutMask full = (CutMask{1} << n) - 1;
  double best = std::numeric_limits<double>::infinity();
  CutMask best_mask = 0;
  if (lo >= hi) return {best, best_mask};

  auto gray = [](std::uint64_t r) { return static_cast<CutMask>(r ^ (r >> 1)); };
  CutMask s = (gray(lo) << 1) | 1U;
  double cap = 0.0, dem = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cutcone::crosses(s, i, j)) {
        cap += inst.c(i, j);
        dem += inst.d(i, j);
      }
  // Crossing demand below this is cancellation residue of the running sum.
  double dem_floor = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dem_floor += inst.d(i, j);
  dem_floor *= 1e-12;
  // Running sums drift; they are recomputed at every rank divisible by
  // kRefresh so the values seen at each rank do not depend on where a range starts.
  for (std::uint64_t r = lo;;) {
    if (s != full && dem > dem_floor) {
      const double v = cap / dem;
      if (v < best || (v == best && s < best_mask)) {
        best = v;
        best_mask = s;
      }
    }
    if (++r >= hi) break;
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(r)) + 1;  // point index flipped
    s ^= (CutMask{1} << bit);
    if (r % kRefresh == 0) {
      cap = dem = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (cutcone::crosses(s, i, j)) {
            cap += inst.c(i, j);
            dem += inst.d(i, j);
          }
      continue;
    }
    const bool now_in = (s >> bit) & 1U;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == bit) continue;
      const bool j_in = (s >> j) & 1U;
      const double sign = (now_in != j_in) ? 1.0 : -1.0;  // +1 when the pair starts crossing
      cap += sign * inst.c(bit, j);
      dem += sign * inst.d(bit, j);
    }
    if (dem < 0.0) dem = 0.0;
  }
  // Re-evaluate the winner exactly to remove accumulated drift.
  if (best_mask != 0) best = phi(best_mask, inst).value_or(best);
  return {best, best_mask};
}

}  // namespace

SparsestCut phi_star(const DemandInstance& inst, unsigned threads) {
  const std::size_t n = inst.size();
  if (n > kMaxEnumerationPoints)
    throw DomainError("exact sparsest cut is limited to n <= 24").with("n", static_cast<double>(n));
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  threads = std::max(1U, std::min<unsigned>(threads, 64));
  std::vector<std::pair<double, CutMask>> partial(threads);
  if (threads == 1) {
    partial[0] = scan_range(inst, 0, total);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t lo = t == 0 ? 0 : (total * t / threads) / kRefresh * kRefresh;
      const std::uint64_t hi = t + 1 == threads ? total : (total * (t + 1) / threads) / kRefresh * kRefresh;
      pool.emplace_back([&, t, lo, hi] { partial[t] = scan_range(inst, lo, hi); });
    }
    for (auto& th : pool) th.join();
  }
  double best = std::numeric_limits<double>::infinity();
  CutMask best_mask = 0;
  for (const auto& [v, m] : partial) {
    if (m == 0) continue;
    if (v < best || (v == best && m < best_mask)) {
      best = v;
      best_mask = m;
    }
  }
  if (best_mask == 0) throw DomainError("no cut carries positive demand");
  return {best, best_mask};
}

double l1_ratio(const cutcone::CutDecomposition& config, const DemandInstance& inst) {
  const std::size_t n = inst.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = config.distance(i, j);
      num += inst.c(i, j) * x;
      den += inst.d(i, j) * x;
    }
  if (!(den > 0.0)) throw DomainError("configuration separates no demand");
  return num / den;
}

double phi_star_l1_check(const DemandInstance& inst, std::size_t trials, std::uint64_t seed) {
  const std::size_t n = inst.size();
  const double star = phi_star(inst).value;
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  const std::uint64_t span = (std::uint64_t{1} << (n - 1)) - 1;
  for (std::size_t t = 0; t < trials; ++t) {
    cutcone::CutDecomposition cfg;
    cfg.n = n;
    const std::size_t atoms = 1 + rng.below(2 * n);
    for (std::size_t a = 0; a < atoms; ++a) {
      const CutMask s = static_cast<CutMask>(((1 + rng.below(span)) << 1) | 1U) & ((CutMask{1} << n) - 1);
      const CutMask mask = (s == ((CutMask{1} << n) - 1)) ? 1U : s;
      cfg.atoms.push_back({mask, rng.uniform(0.01, 1.0)});
    }
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) den += inst.d(i, j) * cfg.distance(i, j);
    if (!(den > 0.0)) continue;
    worst = std::min(worst, l1_ratio(cfg, inst) - star);
  }
  return worst;
}

DemandInstance uniform_instance(std::size_t n, const std::vector<int>& adjacency) {
  if (adjacency.size() != n * n) throw StructuralError("adjacency matrix is not n x n");
  std::vector<double> c(n * n, 0.0), d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adjacency[i * n + j];
      if (a != 0 && a != 1) throw StructuralError("adjacency entries must be 0 or 1");
      if (a != adjacency[j * n + i]) throw StructuralError("adjacency matrix is not symmetric");
      if (i == j && a != 0) throw StructuralError("adjacency matrix has a self loop");
      c[i * n + j] = a;
      d[i * n + j] = (i == j) ? 0.0 : 1.0;
    }
  return DemandInstance(n, std::move(c), std::move(d));
}

DemandInstance uniform_instance_from_edges(std::size_t n,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<int> adj(n * n, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n || u == v) throw StructuralError("edge endpoint out of range or self loop");
    adj[u * n + v] = adj[v * n + u] = 1;
  }
  return uniform_instance(n, adj);
}

}  // namespace gapbench::sparsest
