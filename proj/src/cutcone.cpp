#include "gapbench/cutcone.hpp"

#include <algorithm>
#include <cmath>

#include "gapbench/errors.hpp"
#include "gapbench/sparsestcut.hpp"

namespace gapbench::cutcone {

std::vector<CutMask> enumerate_cuts(std::size_t n) {
  if (n < 2 || n > kMaxCutPoints)
    throw DomainError("cut enumeration needs 2 <= n <= 16").with("n", static_cast<double>(n));
  const CutMask full = (CutMask{1} << n) - 1;
  std::vector<CutMask> out;
  out.reserve((std::size_t{1} << (n - 1)) - 1);
  for (CutMask rest = 0; rest < (CutMask{1} << (n - 1)); ++rest) {
    const CutMask s = (rest << 1) | 1U;
    if (s != full) out.push_back(s);
  }
  return out;
}

CutMask canonical(CutMask s, std::size_t n) noexcept {
  const CutMask full = (CutMask{1} << n) - 1;
  return (s & 1U) ? s : (full & ~s);
}

FiniteMetric cut_metric(CutMask s, std::size_t n) {
  const CutMask full = (CutMask{1} << n) - 1;
  if (n > kMaxCutPoints || (s & full) == 0 || (s & full) == full)
    throw DomainError("cut must be a proper nonempty subset");
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = crosses(s, i, j) ? 1.0 : 0.0;
  return FiniteMetric(n, std::move(d));
}

double CutDecomposition::distance(std::size_t i, std::size_t j) const noexcept {
  double s = 0.0;
  for (const auto& a : atoms)
    if (crosses(a.mask, i, j)) s += a.weight;
  return s;
}

FiniteMetric CutDecomposition::metric() const {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = distance(i, j);
  return FiniteMetric(n, std::move(d));
}

double pair_sum(const std::vector<double>& m, const FiniteMetric& x) {
  double s = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * x(i, j);
  return s;
}

DistortionCertificate c1_exact(const FiniteMetric& d, const lp::Options& options) {
  const std::size_t n = d.size();
  if (n < 2) throw PreconditionError("distortion needs at least two points");
  if (n > kMaxDistortionPoints)
    throw PreconditionError("exact distortion is limited to n <= 14").with("n", static_cast<double>(n));
  require_metric(d);

  const auto cuts = enumerate_cuts(n);
  const std::size_t k = cuts.size();
  const double scale = d.max_distance();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  // Columns: λ_0..λ_{k-1}, D.  Distances normalized to max 1.
  lp::Problem prob(k + 1);
  prob.objective[k] = 1.0;
  std::vector<double> row(k + 1);
  for (const auto& [i, j] : pairs) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t s = 0; s < k; ++s) row[s] = crosses(cuts[s], i, j) ? 1.0 : 0.0;
    prob.add_row(row, lp::Sense::GreaterEq, d(i, j) / scale);
  }
  for (const auto& [i, j] : pairs) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t s = 0; s < k; ++s) row[s] = crosses(cuts[s], i, j) ? 1.0 : 0.0;
    row[k] = -d(i, j) / scale;
    prob.add_row(row, lp::Sense::LessEq, 0.0);
  }
  const auto sol = lp::solve(prob, options);

  DistortionCertificate cert;
  cert.c1 = sol.primal[k];
  cert.lp_pivots = sol.pivots;
  cert.embedding.n = n;
  for (std::size_t s = 0; s < k; ++s)
    if (sol.primal[s] > 1e-14) cert.embedding.atoms.push_back({cuts[s], sol.primal[s] * scale});

  cert.dual_c.assign(n * n, 0.0);
  cert.dual_d.assign(n * n, 0.0);
  const std::size_t npairs = pairs.size();
  double dual_max = 0.0;
  for (double y : sol.dual) dual_max = std::max(dual_max, std::abs(y));
  // Multipliers at round-off level are noise from degenerate pivots.
  const double noise = 1e-10 * dual_max;
  auto clean = [noise](double v) { return v > noise ? v : 0.0; };
  for (std::size_t p = 0; p < npairs; ++p) {
    const auto [i, j] = pairs[p];
    const double alpha = clean(sol.dual[p]);
    const double beta = clean(-sol.dual[npairs + p]);
    cert.dual_d[i * n + j] = cert.dual_d[j * n + i] = alpha;
    cert.dual_c[i * n + j] = cert.dual_c[j * n + i] = beta;
  }
  const double dd = pair_sum(cert.dual_d, d);
  if (!(dd > 0.0)) throw InternalError("dual demand matrix vanishes on the metric");
  for (auto& v : cert.dual_c) v /= dd;
  for (auto& v : cert.dual_d) v /= dd;

  // Certificate checks.
  auto& res = cert.residuals;
  res.lp_duality_gap = sol.duality_gap;
  res.lp_complementarity = sol.complementarity;
  for (const auto& [i, j] : pairs) {
    const double e = cert.embedding.distance(i, j);
    res.primal_lower = std::max(res.primal_lower, (d(i, j) - e) / d(i, j));
    res.primal_upper = std::max(res.primal_upper, (e - cert.c1 * d(i, j)) / d(i, j));
  }
  double worst_cut = 0.0;
  for (CutMask s : cuts) {
    double cs = 0.0, ds = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (crosses(s, i, j)) {
          cs += cert.dual_c[i * n + j];
          ds += cert.dual_d[i * n + j];
        }
    if (ds > 0.0) worst_cut = std::max(worst_cut, (ds - cs) / ds);
  }
  res.cut_inequality = worst_cut;
  const sparsest::DemandInstance inst(n, cert.dual_c, cert.dual_d);
  res.phi_star_error = std::abs(sparsest::phi_star(inst).value - 1.0);
  res.ratio_error = std::abs(pair_sum(cert.dual_c, d) / pair_sum(cert.dual_d, d) - 1.0 / cert.c1);

  const double worst = std::max({res.primal_lower, res.primal_upper, res.cut_inequality, res.phi_star_error,
                                 res.ratio_error});
  if (worst > kCertificateTol) {
    throw InternalError("distortion certificate failed validation")
        .with("primal_lower", res.primal_lower)
        .with("primal_upper", res.primal_upper)
        .with("cut_inequality", res.cut_inequality)
        .with("phi_star_error", res.phi_star_error)
        .with("ratio_error", res.ratio_error);
  }
  return cert;
}

DemandPair dual_demands(const FiniteMetric& d, const lp::Options& options) {
  auto cert = c1_exact(d, options);
  return {std::move(cert.dual_c), std::move(cert.dual_d)};
}

}  // namespace gapbench::cutcone
