#pragma once

#include <cstddef>
#include <vector>

#include "gapbench/metric.hpp"
#include "gapbench/sparsestcut.hpp"

namespace gapbench::sdp {

struct SolverOptions {
  double tol = 1e-4;             // objective accuracy the caller expects (reported, not enforced)
  double residual_tol = 1e-7;    // stop when max(primal, dual) residual falls below this
  std::size_t max_iter = 50'000;
  double relaxation = 1.6;
  double sigma = 0.04;           // initial penalty is sigma / n^2
  std::size_t adapt_every = 50;
  double adapt_ratio = 1000.0;    // rebalance when primal/dual residuals differ by more than this
  std::size_t anderson_memory = 8;  // 0 disables acceleration
};

struct Residuals {
  double primal = 0.0;         // ||x - z||_inf between the affine and cone iterates
  double dual = 0.0;           // sigma ||z_k - z_{k-1}||_inf
  double psd = 0.0;            // max(0, -min eigenvalue of Q)
  double triangle = 0.0;       // worst triangle violation of the returned d
  double normalization = 0.0;  // |sum D d - 1| before final rescaling
  std::size_t iterations = 0;
};

struct SDPSolution {
  SymMatrix q;       // Gram matrix, centered (rows sum to zero)
  FiniteMetric d;    // d(i,j) = Q(i,i) + Q(j,j) - 2 Q(i,j), sum D d = 1
  double objective;  // sum C d, i.e. M*(C, D)
  Residuals residuals;
};

inline constexpr std::size_t kMaxSdpPoints = 16;
inline constexpr double kSolutionTol = 1e-6;

/// M*(C, D): minimize sum C d over squared-Euclidean (negative type) d that
/// satisfy the triangle inequality, normalized by sum D d = 1 (ordered-pair
/// sums). Douglas-Rachford/ADMM splitting between the affine constraints
/// (a cached Cholesky factor of A A^T) and PSD x nonnegative cone.
/// Throws ConvergenceError carrying residuals at the iteration cap.
SDPSolution solve_gl_sdp(const sparsest::DemandInstance& inst, const SolverOptions& opts = {});

struct GapReport {
  double phi_star = 0.0;
  double m_star = 0.0;
  double gap = 0.0;
  cutcone::CutMask argmin = 0;
  Residuals residuals;
  // Populated by gap_lower_bound_from_metric.
  double c1 = 0.0;
  double witness_ratio = 0.0;  // (sum C_d d)/(sum D_d d) for the input metric
};

inline constexpr double kRelaxationSlack = 1e-4;

/// Phi*/M*. Throws InternalError if the gap falls below 1 - 1e-4.
GapReport integrality_gap(const sparsest::DemandInstance& inst, const SolverOptions& opts = {});

/// Builds (C_d, D_d) from the distortion certificate of d and reports the
/// gap on that instance; d itself witnesses M* <= 1/c1(d).
GapReport gap_lower_bound_from_metric(const FiniteMetric& d, const SolverOptions& opts = {});

}  // namespace gapbench::sdp
