#pragma once

#include <cstddef>
#include <vector>

#include "gapbench/errors.hpp"

namespace gapbench::lp {

enum class Sense { LessEq, GreaterEq, Equal };

/// minimize  objective · x
/// subject to  A x (sense) rhs,  x >= 0.
/// A is dense, row-major, rows() x cols().
struct Problem {
  std::vector<double> objective;
  std::vector<double> a;
  std::vector<Sense> senses;
  std::vector<double> rhs;

  explicit Problem(std::size_t cols) : objective(cols, 0.0) {}

  std::size_t cols() const noexcept { return objective.size(); }
  std::size_t rows() const noexcept { return rhs.size(); }
  double coeff(std::size_t r, std::size_t c) const noexcept { return a[r * cols() + c]; }

  void add_row(const std::vector<double>& coeffs, Sense sense, double b);
};

enum class PivotRule {
  Bland,                 // smallest-index entering and leaving variable
  DantzigBlandFallback,  // most negative reduced cost, Bland after a run of degenerate pivots
};

struct Options {
  PivotRule rule = PivotRule::DantzigBlandFallback;
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-11;
  std::size_t max_pivots = 1'000'000;
  std::size_t degenerate_run_before_bland = 50;
};

/// Dual multipliers y satisfy y >= 0 on GreaterEq rows, y <= 0 on LessEq rows,
/// and objective - A^T y >= 0 at optimality.
struct Solution {
  double optimum = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;
  std::size_t pivots = 0;
  double duality_gap = 0.0;         // |c.x - b.y|
  double complementarity = 0.0;     // sum |y_i * row slack_i| + sum |x_j * reduced cost_j|
  double dual_infeasibility = 0.0;  // max violation of the dual sign and reduced-cost conditions
  double primal_infeasibility = 0.0;
};

class InfeasibleError : public ErrorOf<InfeasibleError, ErrorKind::Precondition> {
 public:
  using ErrorOf::ErrorOf;
};

class UnboundedError : public ErrorOf<UnboundedError, ErrorKind::Precondition> {
 public:
  using ErrorOf::ErrorOf;
};

/// Two-phase dense simplex. Throws InfeasibleError / UnboundedError, or
/// ConvergenceError when the pivot cap is exhausted.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace gapbench::lp
