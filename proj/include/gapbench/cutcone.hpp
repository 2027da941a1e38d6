#pragma once

#include <cstdint>
#include <vector>

#include "gapbench/lp.hpp"
#include "gapbench/metric.hpp"

namespace gapbench::cutcone {

using CutMask = std::uint32_t;

inline constexpr std::size_t kMaxCutPoints = 16;
inline constexpr std::size_t kMaxDistortionPoints = 14;

/// The 2^(n-1) - 1 canonical cuts of {0..n-1}: masks containing point 0,
/// excluding the full set, in increasing order.
std::vector<CutMask> enumerate_cuts(std::size_t n);

inline bool crosses(CutMask s, std::size_t i, std::size_t j) noexcept {
  return ((s >> i) ^ (s >> j)) & 1U;
}

/// Complement-invariant representative (the side containing point 0).
CutMask canonical(CutMask s, std::size_t n) noexcept;

/// d_S(i, j) = 1 iff exactly one of i, j lies in S.
FiniteMetric cut_metric(CutMask s, std::size_t n);

struct CutAtom {
  CutMask mask;
  double weight;
};

/// d(x, y) = sum_S weight_S |1_S(x) - 1_S(y)|.
struct CutDecomposition {
  std::size_t n = 0;
  std::vector<CutAtom> atoms;

  double distance(std::size_t i, std::size_t j) const noexcept;
  FiniteMetric metric() const;
};

struct CertificateResiduals {
  double primal_lower = 0.0;      // max over pairs of (d - embedded)/d, clipped at 0
  double primal_upper = 0.0;      // max over pairs of (embedded - c1 d)/d, clipped at 0
  double cut_inequality = 0.0;    // max over cuts of (sum D d_S - sum C d_S)/sum D d_S, clipped at 0
  double phi_star_error = 0.0;    // |Phi*(C_d, D_d) - 1|
  double ratio_error = 0.0;       // |(sum C d)/(sum D d) - 1/c1|
  double lp_duality_gap = 0.0;
  double lp_complementarity = 0.0;
};

/// c1 with a primal cut embedding (d <= embedded <= c1 d) and the dual
/// demand pair (C_d, D_d) as dense symmetric n x n matrices.
struct DistortionCertificate {
  double c1 = 1.0;
  CutDecomposition embedding;
  std::vector<double> dual_c;
  std::vector<double> dual_d;
  CertificateResiduals residuals;
  std::size_t lp_pivots = 0;
};

inline constexpr double kCertificateTol = 1e-6;

/// Exact L1 distortion by the cut-cone LP
///   minimize D  s.t.  d(i,j) <= sum_S λ_S d_S(i,j) <= D d(i,j),  λ >= 0.
/// The dual multipliers α (lower rows) and β (upper rows) give D_d = α and
/// C_d = β, rescaled so sum D_d d = 1; then sum C_d d_S >= sum D_d d_S on
/// every cut and (sum C_d d)/(sum D_d d) = 1/c1. Throws InternalError with
/// residuals when a certificate check fails.
DistortionCertificate c1_exact(const FiniteMetric& d, const lp::Options& options = {});

struct DemandPair {
  std::vector<double> c;
  std::vector<double> d;
};

DemandPair dual_demands(const FiniteMetric& d, const lp::Options& options = {});

/// sum_{i,j} m(i,j) x(i,j) over ordered pairs.
double pair_sum(const std::vector<double>& m, const FiniteMetric& x);

}  // namespace gapbench::cutcone
