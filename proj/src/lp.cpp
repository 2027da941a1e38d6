#include "gapbench/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gapbench::lp {

void Problem::add_row(const std::vector<double>& coeffs, Sense sense, double b) {
  if (coeffs.size() != cols()) throw StructuralError("constraint width does not match the objective");
  a.insert(a.end(), coeffs.begin(), coeffs.end());
  senses.push_back(sense);
  rhs.push_back(b);
}

namespace {

constexpr std::size_t kRefactorEvery = 64;

// Revised simplex over the standard form [A | slack | surplus | artificial],
// with a dense explicit basis inverse that is rebuilt periodically.
class Revised {
 public:
  Revised(const Problem& p, const Options& opt) : opt_(opt), m_(p.rows()), n_(p.cols()) {
    flipped_.assign(m_, false);
    std::vector<Sense> senses = p.senses;
    for (std::size_t r = 0; r < m_; ++r) {
      if (p.rhs[r] < 0.0) {
        flipped_[r] = true;
        if (senses[r] == Sense::LessEq)
          senses[r] = Sense::GreaterEq;
        else if (senses[r] == Sense::GreaterEq)
          senses[r] = Sense::LessEq;
      }
    }
    std::size_t slack = 0, artificial = 0;
    for (auto s : senses) {
      if (s != Sense::Equal) ++slack;
      if (s != Sense::LessEq) ++artificial;
    }
    first_art_ = n_ + slack;
    cols_ = n_ + slack + artificial;
    a_.assign(cols_ * m_, 0.0);
    b_.assign(m_, 0.0);
    basis_.assign(m_, 0);

    std::size_t s_idx = n_, a_idx = first_art_;
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = flipped_[r] ? -1.0 : 1.0;
      for (std::size_t c = 0; c < n_; ++c) col(c)[r] = sign * p.coeff(r, c);
      b_[r] = sign * p.rhs[r];
      switch (senses[r]) {
        case Sense::LessEq:
          col(s_idx)[r] = 1.0;
          basis_[r] = s_idx++;
          break;
        case Sense::GreaterEq:
          col(s_idx++)[r] = -1.0;
          col(a_idx)[r] = 1.0;
          basis_[r] = a_idx++;
          break;
        case Sense::Equal:
          col(a_idx)[r] = 1.0;
          basis_[r] = a_idx++;
          break;
      }
    }
    in_basis_.assign(cols_, false);
    for (auto j : basis_) in_basis_[j] = true;
    cost_.assign(cols_, 0.0);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) binv_[r * m_ + r] = 1.0;
    work_b_ = b_;
    xb_ = b_;
    bscale_ = 1.0;
    for (double v : b_) bscale_ = std::max(bscale_, std::abs(v));
  }

  std::size_t cols() const noexcept { return cols_; }
  std::size_t first_art() const noexcept { return first_art_; }
  double bscale() const noexcept { return bscale_; }

  // Deterministic positive rhs shifts that break primal degeneracy.
  void perturb() {
    std::mt19937_64 gen(0x5eedULL);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (std::size_t r = 0; r < m_; ++r) work_b_[r] = b_[r] + 1e-7 * (1.0 + std::abs(b_[r])) * u(gen);
    refactor();
  }

  void restore_rhs() {
    work_b_ = b_;
    refactor();
  }

  void set_costs(const std::vector<double>& c) { cost_ = c; }

  double objective() const {
    double z = 0.0;
    for (std::size_t r = 0; r < m_; ++r) z += cost_[basis_[r]] * xb_[r];
    return z;
  }

  template <class Allow>
  void primal_simplex(Allow&& allow, std::size_t& pivots) {
    bool bland = opt_.rule == PivotRule::Bland;
    std::size_t degenerate_run = 0;
    std::vector<double> y(m_), alpha(m_), d(cols_);
    while (true) {
      duals(y);
      std::size_t enter = cols_;
      double best = -opt_.feasibility_tol;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (in_basis_[j] || !allow(j)) continue;
        const double dj = reduced_cost(j, y);
        if (dj >= -opt_.feasibility_tol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (dj < best) {
          best = dj;
          enter = j;
        }
      }
      if (enter == cols_) return;

      ftran(enter, alpha);
      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (alpha[r] <= opt_.pivot_tol) continue;
        const double ratio = std::max(xb_[r], 0.0) / alpha[r];
        const bool tie = leave < m_ && std::abs(ratio - best_ratio) <= 1e-12 * (1.0 + best_ratio);
        if ((ratio < best_ratio && !tie) || (tie && basis_[r] < basis_[leave])) {
          best_ratio = std::min(ratio, best_ratio);
          leave = r;
        }
      }
      if (leave == m_) throw UnboundedError("linear program is unbounded");

      if (best_ratio <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_run_before_bland) bland = true;
      } else {
        degenerate_run = 0;
        bland = opt_.rule == PivotRule::Bland;
      }
      pivot(leave, enter, alpha);
      if (++pivots > opt_.max_pivots)
        throw ConvergenceError("simplex pivot cap exhausted").with("pivots", static_cast<double>(pivots));
    }
  }

  // Restores primal feasibility from a dual feasible basis.
  template <class Allow>
  void dual_simplex(Allow&& allow, std::size_t& pivots) {
    std::vector<double> y(m_), alpha(m_), rowv(m_);
    while (true) {
      std::size_t leave = m_;
      double worst = -opt_.feasibility_tol * bscale_;
      for (std::size_t r = 0; r < m_; ++r)
        if (xb_[r] < worst) {
          worst = xb_[r];
          leave = r;
        }
      if (leave == m_) return;
      duals(y);
      for (std::size_t k = 0; k < m_; ++k) rowv[k] = binv_[leave * m_ + k];
      std::size_t enter = cols_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols_; ++j) {
        if (in_basis_[j] || !allow(j)) continue;
        const double* cj = col(j);
        double arj = 0.0;
        for (std::size_t k = 0; k < m_; ++k) arj += rowv[k] * cj[k];
        if (arj >= -opt_.pivot_tol) continue;
        const double ratio = std::max(reduced_cost(j, y), 0.0) / -arj;
        if (ratio < best) {
          best = ratio;
          enter = j;
        }
      }
      if (enter == cols_) throw InfeasibleError("linear program is infeasible").with("row_value", worst);
      ftran(enter, alpha);
      pivot(leave, enter, alpha);
      if (++pivots > opt_.max_pivots)
        throw ConvergenceError("simplex pivot cap exhausted").with("pivots", static_cast<double>(pivots));
    }
  }

  // Pivots zero-level artificials out of the basis where possible.
  void expel_artificials(std::size_t& pivots) {
    std::vector<double> alpha(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      std::size_t best = cols_;
      double best_abs = 1e-9;
      for (std::size_t j = 0; j < first_art_; ++j) {
        if (in_basis_[j]) continue;
        const double* cj = col(j);
        double v = 0.0;
        for (std::size_t k = 0; k < m_; ++k) v += binv_[r * m_ + k] * cj[k];
        if (std::abs(v) > best_abs) {
          best_abs = std::abs(v);
          best = j;
        }
      }
      if (best != cols_) {
        ftran(best, alpha);
        pivot(r, best, alpha);
        ++pivots;
      }
    }
  }

  std::vector<double> primal() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) x[basis_[r]] = std::max(xb_[r], 0.0);
    return x;
  }

  std::vector<double> dual() const {
    std::vector<double> y(m_);
    duals(y);
    for (std::size_t i = 0; i < m_; ++i)
      if (flipped_[i]) y[i] = -y[i];
    return y;
  }

 private:
  double* col(std::size_t j) noexcept { return &a_[j * m_]; }
  const double* col(std::size_t j) const noexcept { return &a_[j * m_]; }

  void duals(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double c = cost_[basis_[r]];
      if (c == 0.0) continue;
      const double* row = &binv_[r * m_];
      for (std::size_t k = 0; k < m_; ++k) y[k] += c * row[k];
    }
  }

  double reduced_cost(std::size_t j, const std::vector<double>& y) const {
    const double* cj = col(j);
    double s = cost_[j];
    for (std::size_t k = 0; k < m_; ++k) s -= y[k] * cj[k];
    return s;
  }

  void ftran(std::size_t j, std::vector<double>& out) const {
    const double* cj = col(j);
    for (std::size_t r = 0; r < m_; ++r) {
      const double* row = &binv_[r * m_];
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += row[k] * cj[k];
      out[r] = s;
    }
  }

  void pivot(std::size_t r, std::size_t enter, const std::vector<double>& alpha) {
    const double piv = alpha[r];
    double* prow = &binv_[r * m_];
    for (std::size_t k = 0; k < m_; ++k) prow[k] /= piv;
    const double theta = xb_[r] / piv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      double* row = &binv_[i * m_];
      const double f = alpha[i];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      xb_[i] -= f * theta;
    }
    xb_[r] = theta;
    in_basis_[basis_[r]] = false;
    in_basis_[enter] = true;
    basis_[r] = enter;
    if (++since_refactor_ >= kRefactorEvery) refactor();
  }

  // Gauss-Jordan inversion of the current basis with partial pivoting.
  void refactor() {
    since_refactor_ = 0;
    std::vector<double> bm(m_ * m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const double* cj = col(basis_[r]);
      for (std::size_t k = 0; k < m_; ++k) bm[k * m_ + r] = cj[k];
    }
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) inv[r * m_ + r] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(bm[r * m_ + c]) > std::abs(bm[p * m_ + c])) p = r;
      if (std::abs(bm[p * m_ + c]) < 1e-14) throw InternalError("simplex basis became singular");
      if (p != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(bm[p * m_ + k], bm[c * m_ + k]);
          std::swap(inv[p * m_ + k], inv[c * m_ + k]);
        }
      const double d = bm[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        bm[c * m_ + k] /= d;
        inv[c * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = bm[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          bm[r * m_ + k] -= f * bm[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    for (std::size_t r = 0; r < m_; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[r * m_ + k] * work_b_[k];
      xb_[r] = s;
    }
  }

  const Options& opt_;
  std::size_t m_, n_;
  std::size_t first_art_ = 0, cols_ = 0;
  std::vector<double> a_;  // column-major m x cols
  std::vector<double> b_, work_b_, xb_;
  std::vector<std::size_t> basis_;
  std::vector<bool> in_basis_;
  std::vector<bool> flipped_;
  std::vector<double> cost_;
  std::vector<double> binv_;
  std::size_t since_refactor_ = 0;
  double bscale_ = 1.0;
};

}  // namespace

Solution solve(const Problem& p, const Options& opt) {
  if (p.a.size() != p.rows() * p.cols() || p.senses.size() != p.rows())
    throw StructuralError("inconsistent LP dimensions");
  Revised lp(p, opt);
  Solution sol;
  lp.perturb();

  // Phase 1: minimize the sum of artificials.
  if (lp.first_art() < lp.cols()) {
    std::vector<double> c1(lp.cols(), 0.0);
    for (std::size_t j = lp.first_art(); j < lp.cols(); ++j) c1[j] = 1.0;
    lp.set_costs(c1);
    lp.primal_simplex([](std::size_t) { return true; }, sol.pivots);
    if (lp.objective() > 1e-6 * lp.bscale())
      throw InfeasibleError("linear program is infeasible").with("phase1_objective", lp.objective());
    lp.expel_artificials(sol.pivots);
  }

  // Phase 2 on the perturbed rhs, then a dual cleanup on the true rhs.
  std::vector<double> c2(lp.cols(), 0.0);
  std::copy(p.objective.begin(), p.objective.end(), c2.begin());
  lp.set_costs(c2);
  const std::size_t first_art = lp.first_art();
  auto structural = [first_art](std::size_t j) { return j < first_art; };
  lp.primal_simplex(structural, sol.pivots);
  lp.restore_rhs();
  lp.dual_simplex(structural, sol.pivots);
  lp.primal_simplex(structural, sol.pivots);

  sol.primal = lp.primal();
  sol.dual = lp.dual();
  sol.optimum = 0.0;
  for (std::size_t j = 0; j < p.cols(); ++j) sol.optimum += p.objective[j] * sol.primal[j];

  double dual_obj = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) dual_obj += p.rhs[i] * sol.dual[i];
  sol.duality_gap = std::abs(sol.optimum - dual_obj);

  for (std::size_t i = 0; i < p.rows(); ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) ax += p.coeff(i, j) * sol.primal[j];
    const double slack = ax - p.rhs[i];
    double viol = 0.0;
    if (p.senses[i] == Sense::LessEq) {
      viol = std::max(slack, 0.0);
      sol.dual_infeasibility = std::max(sol.dual_infeasibility, sol.dual[i]);
    } else if (p.senses[i] == Sense::GreaterEq) {
      viol = std::max(-slack, 0.0);
      sol.dual_infeasibility = std::max(sol.dual_infeasibility, -sol.dual[i]);
    } else {
      viol = std::abs(slack);
    }
    sol.primal_infeasibility = std::max(sol.primal_infeasibility, viol);
    sol.complementarity += std::abs(sol.dual[i] * slack);
  }
  for (std::size_t j = 0; j < p.cols(); ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) aty += p.coeff(i, j) * sol.dual[i];
    const double rc = p.objective[j] - aty;
    sol.dual_infeasibility = std::max(sol.dual_infeasibility, -rc);
    sol.complementarity += std::abs(sol.primal[j] * rc);
  }
  return sol;
}

}  // namespace gapbench::lp
