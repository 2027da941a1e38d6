#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gapbench {

/// Symmetric n x n matrix stored as its packed upper triangle, so
/// entries(i, j) == entries(j, i) holds by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0);

  /// Builds from a dense row-major matrix; throws StructuralError if it is
  /// not square or differs from its transpose by more than `sym_tol` (relative).
  static SymMatrix from_dense(std::span<const double> dense, std::size_t n, double sym_tol = 0.0);
  static SymMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[index(i, j)]; }
  double& at(std::size_t i, std::size_t j) noexcept { return data_[index(i, j)]; }

  std::vector<double> to_dense() const;
  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);

/// Finite (semi)metric on {0, ..., n-1}. Construction enforces the structural
/// invariants (square, symmetric, zero diagonal, finite nonnegative entries);
/// the triangle inequality and positivity are checked by check_metric /
/// require_metric.
class FiniteMetric {
 public:
  FiniteMetric() = default;
  FiniteMetric(std::size_t n, std::vector<double> dense);

  static FiniteMetric from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  const std::vector<double>& dense() const noexcept { return d_; }
  std::vector<std::vector<double>> rows() const;

  double max_distance() const;
  FiniteMetric scaled(double alpha) const;
  FiniteMetric restricted(std::span<const std::size_t> points) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

struct TriangleViolation {
  std::size_t i, j, k;
  double slack;  // d(i,k) + d(k,j) - d(i,j), negative when violated
};

inline constexpr double kTriangleTol = 1e-12;
inline constexpr double kPsdTol = 1e-8;

/// Triples (i < j, k) with d(i,j) > d(i,k) + d(k,j) + kTriangleTol * max(d).
std::vector<TriangleViolation> check_metric(const FiniteMetric& d);

/// Throws PreconditionError unless d is a metric: positive off the diagonal
/// and free of triangle violations.
void require_metric(const FiniteMetric& d);

/// Schoenberg Gram matrix G(i,j) = (d(i,b) + d(j,b) - d(i,j)) / 2.
SymMatrix gram_from_sqrt_metric(const FiniteMetric& d, std::size_t base);

struct NegativeTypeResult {
  bool negative_type;
  double min_eigenvalue;
};

NegativeTypeResult is_negative_type(const FiniteMetric& d, double tol = kPsdTol,
                                    std::size_t base = 0);

struct EigenDecomposition {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row-major n x n; column k is the k-th eigenvector
};

/// Cyclic Jacobi eigensolver. Throws ConvergenceError after `max_sweeps`.
EigenDecomposition sym_eigen(const SymMatrix& m, int max_sweeps = 100);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to 0).
SymMatrix psd_project(const SymMatrix& m);

/// Dense Cholesky factorization of an SPD matrix; throws DomainError when a
/// pivot is not positive.
class Cholesky {
 public:
  Cholesky(std::vector<double> a, std::size_t n);
  std::size_t size() const noexcept { return n_; }
  void solve_in_place(std::span<double> rhs) const;

 private:
  std::size_t n_;
  std::vector<double> l_;
};

}  // namespace gapbench
