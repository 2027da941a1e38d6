#include "gapbench/sdp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "gapbench/cutcone.hpp"
#include "gapbench/errors.hpp"

namespace gapbench::sdp {

namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;

std::size_t packed(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + j;
}

// Coefficients of d_ij(Q) = Q_ii + Q_jj - 2 Q_ij on the scaled packed vector
// (off-diagonal slots hold sqrt(2) Q_ij so the Euclidean inner product is the
// Frobenius one).
void add_distance(SparseRow& row, std::size_t i, std::size_t j, std::size_t n, double coef) {
  row.emplace_back(packed(i, i, n), coef);
  row.emplace_back(packed(j, j, n), coef);
  row.emplace_back(packed(i, j, n), -std::numbers::sqrt2 * coef);
}

SparseRow compress(SparseRow row) {
  std::sort(row.begin(), row.end());
  SparseRow out;
  for (const auto& [c, v] : row) {
    if (!out.empty() && out.back().first == c)
      out.back().second += v;
    else
      out.emplace_back(c, v);
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0.0; });
  return out;
}

struct Problem {
  std::size_t n = 0;
  std::size_t nq = 0;     // packed Gram entries
  std::size_t nvar = 0;   // nq + triangle slacks
  std::vector<SparseRow> rows;
  std::vector<double> b;
  std::vector<double> c;
};

Problem build(const std::vector<double>& cap, const std::vector<double>& dem, std::size_t n) {
  Problem p;
  p.n = n;
  p.nq = n * (n + 1) / 2;
  std::vector<std::array<std::size_t, 3>> tri;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) tri.push_back({i, j, k});
  p.nvar = p.nq + tri.size();

  SparseRow norm;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dem[i * n + j] != 0.0) add_distance(norm, i, j, n, 2.0 * dem[i * n + j]);
  p.rows.push_back(compress(std::move(norm)));
  p.b.push_back(1.0);

  for (std::size_t i = 0; i < n; ++i) {
    SparseRow center;
    for (std::size_t j = 0; j < n; ++j)
      center.emplace_back(packed(i, j, n), i == j ? 1.0 : 1.0 / std::numbers::sqrt2);
    p.rows.push_back(compress(std::move(center)));
    p.b.push_back(0.0);
  }

  for (std::size_t t = 0; t < tri.size(); ++t) {
    const auto [i, j, k] = tri[t];
    SparseRow row;
    add_distance(row, i, k, n, 1.0);
    add_distance(row, k, j, n, 1.0);
    add_distance(row, i, j, n, -1.0);
    row.emplace_back(p.nq + t, -1.0);
    p.rows.push_back(compress(std::move(row)));
    p.b.push_back(0.0);
  }

  p.c.assign(p.nvar, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = 2.0 * cap[i * n + j];
      if (w == 0.0) continue;
      p.c[packed(i, i, n)] += w;
      p.c[packed(j, j, n)] += w;
      p.c[packed(i, j, n)] -= std::numbers::sqrt2 * w;
    }
  return p;
}

std::vector<double> gram_of_rows(const Problem& p) {
  const std::size_t m = p.rows.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> by_col(p.nvar);
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [c, v] : p.rows[r]) by_col[c].emplace_back(r, v);
  std::vector<double> g(m * m, 0.0);
  for (const auto& col : by_col)
    for (const auto& [r1, v1] : col)
      for (const auto& [r2, v2] : col) g[r1 * m + r2] += v1 * v2;
  for (std::size_t r = 0; r < m; ++r) g[r * m + r] *= 1.0 + 1e-13;
  return g;
}

class AffineProjector {
 public:
  explicit AffineProjector(const Problem& p) : p_(p), chol_(gram_of_rows(p), p.rows.size()), tmp_(p.rows.size()) {}

  // v <- v - A^T (A A^T)^{-1} (A v - b)
  void project(std::vector<double>& v) {
    for (std::size_t r = 0; r < p_.rows.size(); ++r) {
      double s = -p_.b[r];
      for (const auto& [c, a] : p_.rows[r]) s += a * v[c];
      tmp_[r] = s;
    }
    chol_.solve_in_place(tmp_);
    for (std::size_t r = 0; r < p_.rows.size(); ++r)
      for (const auto& [c, a] : p_.rows[r]) v[c] -= a * tmp_[r];
  }

 private:
  const Problem& p_;
  Cholesky chol_;
  std::vector<double> tmp_;
};

SymMatrix unpack(const std::vector<double>& z, std::size_t n) {
  SymMatrix q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = z[packed(i, j, n)];
      q.at(i, j) = (i == j) ? v : v / std::numbers::sqrt2;
    }
  return q;
}

void pack(const SymMatrix& q, std::vector<double>& z) {
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) z[packed(i, j, n)] = (i == j) ? q(i, j) : std::numbers::sqrt2 * q(i, j);
}

void project_cone(std::vector<double>& z, const Problem& p) {
  pack(psd_project(unpack(z, p.n)), z);
  for (std::size_t k = p.nq; k < p.nvar; ++k) z[k] = std::max(z[k], 0.0);
}

// Type-II Anderson acceleration for a fixed-point map with residual f = T(w) - w.
class Anderson {
 public:
  Anderson(std::size_t dim, std::size_t memory) : dim_(dim), mem_(memory) {}

  void reset() {
    dw_.clear();
    df_.clear();
    have_prev_ = false;
  }

  // Replaces w by the next iterate; returns false for a plain step.
  bool step(std::vector<double>& w, const std::vector<double>& f) {
    if (have_prev_) {
      std::vector<double> a(dim_), b(dim_);
      for (std::size_t k = 0; k < dim_; ++k) {
        a[k] = w[k] - w_prev_[k];
        b[k] = f[k] - f_prev_[k];
      }
      dw_.push_back(std::move(a));
      df_.push_back(std::move(b));
      if (dw_.size() > mem_) {
        dw_.erase(dw_.begin());
        df_.erase(df_.begin());
      }
    }
    w_prev_ = w;
    f_prev_ = f;
    have_prev_ = true;
    const std::size_t m = df_.size();
    if (m == 0 || mem_ == 0) {
      for (std::size_t k = 0; k < dim_; ++k) w[k] += f[k];
      return false;
    }
    std::vector<double> g(m * m, 0.0), rhs(m, 0.0);
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) s += df_[i][k] * df_[j][k];
        g[i * m + j] = g[j * m + i] = s;
      }
      trace += g[i * m + i];
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += df_[i][k] * f[k];
      rhs[i] = s;
    }
    for (std::size_t i = 0; i < m; ++i) g[i * m + i] += 1e-10 * trace + 1e-300;
    try {
      Cholesky(g, m).solve_in_place(rhs);
    } catch (const Error&) {
      reset();
      for (std::size_t k = 0; k < dim_; ++k) w[k] += f[k];
      return false;
    }
    for (std::size_t k = 0; k < dim_; ++k) {
      double corr = 0.0;
      for (std::size_t i = 0; i < m; ++i) corr += (dw_[i][k] + df_[i][k]) * rhs[i];
      w[k] += f[k] - corr;
    }
    return true;
  }

 private:
  std::size_t dim_, mem_;
  std::vector<std::vector<double>> dw_, df_;
  std::vector<double> w_prev_, f_prev_;
  bool have_prev_ = false;
};

}  // namespace

SDPSolution solve_gl_sdp(const sparsest::DemandInstance& inst, const SolverOptions& opts) {
  const std::size_t n = inst.size();
  if (n > kMaxSdpPoints) throw PreconditionError("SDP solver is limited to n <= 16").with("n", static_cast<double>(n));

  // Normalize C and D to unit ordered-pair mass; undone at the end.
  double csum = 0.0, dsum = 0.0;
  for (double v : inst.capacities()) csum += v;
  for (double v : inst.demands()) dsum += v;
  std::vector<double> cap = inst.capacities(), dem = inst.demands();
  const double cscale = csum > 0.0 ? csum : 1.0;
  for (auto& v : cap) v /= cscale;
  for (auto& v : dem) v /= dsum;

  const Problem p = build(cap, dem, n);
  AffineProjector proj(p);

  const std::size_t nv = p.nvar;
  double sigma = opts.sigma / static_cast<double>(n * n);
  const double alpha = opts.relaxation;
  // Fixed-point state w = (z, u); one relaxed ADMM sweep is the map T.
  std::vector<double> w(2 * nv, 0.0), tw(2 * nv), x(nv), v(nv);
  double r_prim = 0.0, r_dual = 0.0;
  auto sweep = [&](const std::vector<double>& in, std::vector<double>& out) {
    const double* z = in.data();
    const double* u = in.data() + nv;
    double* zn = out.data();
    double* un = out.data() + nv;
    for (std::size_t k = 0; k < nv; ++k) x[k] = z[k] - u[k] - p.c[k] / sigma;
    proj.project(x);
    for (std::size_t k = 0; k < nv; ++k) v[k] = alpha * x[k] + (1.0 - alpha) * z[k] + u[k];
    std::copy(v.begin(), v.end(), zn);
    std::vector<double> zc(zn, zn + nv);
    project_cone(zc, p);
    std::copy(zc.begin(), zc.end(), zn);
    r_prim = r_dual = 0.0;
    for (std::size_t k = 0; k < nv; ++k) {
      un[k] = v[k] - zn[k];
      r_prim = std::max(r_prim, std::abs(x[k] - zn[k]));
      r_dual = std::max(r_dual, std::abs(zn[k] - z[k]));
    }
    r_dual *= sigma;
  };

  Anderson aa(2 * nv, opts.anderson_memory);
  std::vector<double> f(2 * nv), tw_prev(2 * nv);
  double f_prev_norm = std::numeric_limits<double>::infinity();
  bool accelerated = false;
  Residuals res;
  bool converged = false;

  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    sweep(w, tw);
    double fnorm = 0.0;
    for (std::size_t k = 0; k < 2 * nv; ++k) {
      f[k] = tw[k] - w[k];
      fnorm += f[k] * f[k];
    }
    fnorm = std::sqrt(fnorm);
    if (accelerated && !(fnorm <= 2.0 * f_prev_norm)) {
      // Reject the extrapolated point and fall back to the plain step.
      w = tw_prev;
      aa.reset();
      accelerated = false;
      continue;
    }
    res.primal = r_prim;
    res.dual = r_dual;
    res.iterations = it;
    if (std::max(r_prim, r_dual) < opts.residual_tol) {
      w = tw;
      converged = true;
      break;
    }
    if (it % opts.adapt_every == 0 && r_prim > 0.0 && r_dual > 0.0) {
      const double ratio = r_prim / r_dual;
      if (ratio > opts.adapt_ratio || ratio < 1.0 / opts.adapt_ratio) {
        const double next = std::clamp(sigma * std::clamp(std::sqrt(ratio), 0.1, 10.0), 1e-8, 1e8);
        for (std::size_t k = nv; k < 2 * nv; ++k) tw[k] *= sigma / next;
        sigma = next;
        aa.reset();
        w = tw;
        accelerated = false;
        f_prev_norm = std::numeric_limits<double>::infinity();
        continue;
      }
    }
    f_prev_norm = fnorm;
    tw_prev = tw;
    accelerated = aa.step(w, f);
  }
  const std::vector<double> z(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(nv));

  SDPSolution sol;
  sol.q = unpack(z, n);
  // Centered Gram -> squared distances.
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dense[i * n + j] = dense[j * n + i] = std::max(0.0, sol.q(i, i) + sol.q(j, j) - 2.0 * sol.q(i, j));
  double norm_value = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) norm_value += inst.d(i, j) * dense[i * n + j];
  res.normalization = std::abs(norm_value - 1.0);
  // Back to the caller's D: sum D d = 1.
  if (!(norm_value > 0.0)) throw ConvergenceError("SDP iterate collapsed to zero").with("iterations", double(res.iterations));
  const double rescale = 1.0 / norm_value;
  for (auto& e : dense) e *= rescale;
  SymMatrix q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) q.at(i, j) = sol.q(i, j) * rescale;
  sol.q = q;
  sol.d = FiniteMetric(n, dense);

  sol.objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sol.objective += inst.c(i, j) * dense[i * n + j];

  const auto eig = sym_eigen(sol.q);
  res.psd = std::max(0.0, -eig.values.back());
  double tri = 0.0;
  for (const auto& t : check_metric(sol.d)) tri = std::max(tri, -t.slack);
  res.triangle = tri;
  sol.residuals = res;

  if (!converged) {
    throw ConvergenceError("SDP solver hit its iteration cap")
        .with("iterations", static_cast<double>(res.iterations))
        .with("primal", res.primal)
        .with("dual", res.dual)
        .with("objective", sol.objective);
  }
  if (res.psd > kSolutionTol || res.triangle > kSolutionTol) {
    throw ConvergenceError("SDP solution violates its invariants")
        .with("psd", res.psd)
        .with("triangle", res.triangle);
  }
  return sol;
}

GapReport integrality_gap(const sparsest::DemandInstance& inst, const SolverOptions& opts) {
  GapReport rep;
  const auto cut = sparsest::phi_star(inst);
  rep.phi_star = cut.value;
  rep.argmin = cut.argmin;
  const auto sol = solve_gl_sdp(inst, opts);
  rep.m_star = sol.objective;
  rep.residuals = sol.residuals;
  rep.gap = rep.m_star > 0.0 ? rep.phi_star / rep.m_star : std::numeric_limits<double>::infinity();
  if (rep.phi_star == 0.0 && rep.m_star <= kRelaxationSlack) rep.gap = 1.0;
  if (rep.gap < 1.0 - kRelaxationSlack)
    throw InternalError("relaxation value exceeds the sparsest cut")
        .with("phi_star", rep.phi_star)
        .with("m_star", rep.m_star);
  return rep;
}

GapReport gap_lower_bound_from_metric(const FiniteMetric& d, const SolverOptions& opts) {
  if (d.size() > cutcone::kMaxDistortionPoints)
    throw PreconditionError("gap pipeline is limited to n <= 14").with("n", static_cast<double>(d.size()));
  require_metric(d);
  const auto nt = is_negative_type(d);
  if (!nt.negative_type)
    throw PreconditionError("metric is not of negative type").with("min_eigenvalue", nt.min_eigenvalue);
  const auto cert = cutcone::c1_exact(d);
  const sparsest::DemandInstance inst(d.size(), cert.dual_c, cert.dual_d);
  GapReport rep = integrality_gap(inst, opts);
  rep.c1 = cert.c1;
  rep.witness_ratio = cutcone::pair_sum(cert.dual_c, d) / cutcone::pair_sum(cert.dual_d, d);
  return rep;
}

}  // namespace gapbench::sdp
