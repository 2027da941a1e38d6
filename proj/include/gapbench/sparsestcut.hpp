#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gapbench/cutcone.hpp"
#include "gapbench/metric.hpp"

namespace gapbench::sparsest {

using cutcone::CutMask;

/// Capacities C and demands D, dense symmetric n x n with zero diagonals.
class DemandInstance {
 public:
  DemandInstance(std::size_t n, std::vector<double> capacities, std::vector<double> demands);

  std::size_t size() const noexcept { return n_; }
  double c(std::size_t i, std::size_t j) const noexcept { return c_[i * n_ + j]; }
  double d(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  const std::vector<double>& capacities() const noexcept { return c_; }
  const std::vector<double>& demands() const noexcept { return d_; }

  DemandInstance scaled(double alpha, double beta) const;

 private:
  std::size_t n_;
  std::vector<double> c_;
  std::vector<double> d_;
};

inline constexpr std::size_t kMaxEnumerationPoints = 24;

/// Crossing capacity over crossing demand; empty when no demand crosses S.
std::optional<double> phi(CutMask s, const DemandInstance& inst);

struct SparsestCut {
  double value;
  CutMask argmin;  // canonical (contains point 0)
};

/// Exact minimum of phi over canonical cuts with defined ratio, by Gray-code
/// enumeration. Ties resolve to the smallest mask, so the result does not
/// depend on `threads`. Throws DomainError if every cut is undefined.
SparsestCut phi_star(const DemandInstance& inst, unsigned threads = 1);

/// Capacity/demand ratio of an L1 configuration given as a cut decomposition.
double l1_ratio(const cutcone::CutDecomposition& config, const DemandInstance& inst);

/// Worst slack min(ratio - Phi*) over `trials` random cut decompositions.
double phi_star_l1_check(const DemandInstance& inst, std::size_t trials, std::uint64_t seed);

/// Capacities = adjacency, demands = 1 off the diagonal.
DemandInstance uniform_instance(std::size_t n, const std::vector<int>& adjacency);
DemandInstance uniform_instance_from_edges(std::size_t n,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace gapbench::sparsest
