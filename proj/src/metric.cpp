#include "gapbench/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gapbench/errors.hpp"

namespace gapbench {

SymMatrix::SymMatrix(std::size_t n, double fill) : n_(n), data_(n * (n + 1) / 2, fill) {}

SymMatrix SymMatrix::from_dense(std::span<const double> dense, std::size_t n, double sym_tol) {
  if (dense.size() != n * n) throw StructuralError("matrix is not square");
  double scale = 0.0;
  for (double v : dense) scale = std::max(scale, std::abs(v));
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double a = dense[i * n + j];
      const double b = dense[j * n + i];
      if (std::abs(a - b) > sym_tol * scale) throw StructuralError("matrix is not symmetric");
      m.at(i, j) = 0.5 * (a + b);
    }
  }
  return m;
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<double> SymMatrix::to_dense() const {
  std::vector<double> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = (*this)(i, j);
  return out;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

double SymMatrix::max_abs() const {
  double s = 0.0;
  for (double v : data_) s = std::max(s, std::abs(v));
  return s;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.size() != b.size()) throw StructuralError("dimension mismatch");
  SymMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j) out.at(i, j) = a(i, j) - b(i, j);
  return out;
}

FiniteMetric::FiniteMetric(std::size_t n, std::vector<double> dense) : n_(n), d_(std::move(dense)) {
  if (d_.size() != n_ * n_) throw StructuralError("distance matrix is not square");
  double scale = 0.0;
  for (double v : d_) {
    if (!std::isfinite(v)) throw StructuralError("distance matrix has a non-finite entry");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (std::abs(d_[i * n_ + i]) > 1e-12 * scale)
      throw StructuralError("distance matrix has a nonzero diagonal entry");
    d_[i * n_ + i] = 0.0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      double& a = d_[i * n_ + j];
      double& b = d_[j * n_ + i];
      if (std::abs(a - b) > 1e-12 * scale) throw StructuralError("distance matrix is not symmetric");
      if (a < 0.0 || b < 0.0) throw StructuralError("distance matrix has a negative entry");
      a = b = 0.5 * (a + b);
    }
  }
}

FiniteMetric FiniteMetric::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> dense;
  dense.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw StructuralError("distance matrix is not square");
    dense.insert(dense.end(), r.begin(), r.end());
  }
  return FiniteMetric(n, std::move(dense));
}

std::vector<std::vector<double>> FiniteMetric::rows() const {
  std::vector<std::vector<double>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i].assign(d_.begin() + i * n_, d_.begin() + (i + 1) * n_);
  return out;
}

double FiniteMetric::max_distance() const {
  return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end());
}

FiniteMetric FiniteMetric::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw DomainError("metric scale factor must be positive");
  std::vector<double> out = d_;
  for (double& v : out) v *= alpha;
  return FiniteMetric(n_, std::move(out));
}

FiniteMetric FiniteMetric::restricted(std::span<const std::size_t> points) const {
  const std::size_t m = points.size();
  std::vector<double> out(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    if (points[a] >= n_) throw StructuralError("point index out of range");
    for (std::size_t b = 0; b < m; ++b) out[a * m + b] = (*this)(points[a], points[b]);
  }
  return FiniteMetric(m, std::move(out));
}

std::vector<TriangleViolation> check_metric(const FiniteMetric& d) {
  const std::size_t n = d.size();
  const double tol = kTriangleTol * d.max_distance();
  std::vector<TriangleViolation> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double slack = d(i, k) + d(k, j) - d(i, j);
        if (slack < -tol) out.push_back({i, j, k, slack});
      }
  return out;
}

void require_metric(const FiniteMetric& d) {
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (!(d(i, j) > 0.0))
        throw PreconditionError("distinct points at zero distance")
            .with("i", static_cast<double>(i))
            .with("j", static_cast<double>(j));
  const auto violations = check_metric(d);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw PreconditionError("triangle inequality violated")
        .with("i", static_cast<double>(v.i))
        .with("j", static_cast<double>(v.j))
        .with("k", static_cast<double>(v.k))
        .with("slack", v.slack)
        .with("count", static_cast<double>(violations.size()));
  }
}

SymMatrix gram_from_sqrt_metric(const FiniteMetric& d, std::size_t base) {
  const std::size_t n = d.size();
  if (base >= n) throw StructuralError("base point index out of range");
  SymMatrix g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) g.at(i, j) = 0.5 * (d(i, base) + d(j, base) - d(i, j));
  return g;
}

NegativeTypeResult is_negative_type(const FiniteMetric& d, double tol, std::size_t base) {
  if (d.size() <= 1) return {true, 0.0};
  const SymMatrix g = gram_from_sqrt_metric(d, base);
  const auto eig = sym_eigen(g);
  const double min_eig = eig.values.back();
  return {min_eig >= -tol * std::max(g.frobenius_norm(), 1e-300), min_eig};
}

EigenDecomposition sym_eigen(const SymMatrix& m, int max_sweeps) {
  const std::size_t n = m.size();
  std::vector<double> a = m.to_dense();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double norm = std::max(m.frobenius_norm(), 1e-300);
  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal() <= 1e-14 * norm) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diagonal() > 1e-10 * norm)
    throw ConvergenceError("Jacobi eigensolver hit its sweep cap").with("off_diagonal", off_diagonal());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]];
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + k] = v[r * n + order[k]];
  }
  return out;
}

SymMatrix psd_project(const SymMatrix& m) {
  const std::size_t n = m.size();
  const auto eig = sym_eigen(m);
  SymMatrix out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.values[k];
    if (lam <= 0.0) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = lam * eig.vectors[i * n + k];
      for (std::size_t j = i; j < n; ++j) out.at(i, j) += vi * eig.vectors[j * n + k];
    }
  }
  return out;
}

Cholesky::Cholesky(std::vector<double> a, std::size_t n) : n_(n), l_(std::move(a)) {
  if (l_.size() != n * n) throw StructuralError("Cholesky input is not square");
  for (std::size_t j = 0; j < n; ++j) {
    double diag = l_[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= l_[j * n + k] * l_[j * n + k];
    if (!(diag > 0.0)) throw DomainError("matrix is not positive definite").with("pivot", diag);
    const double ljj = std::sqrt(diag);
    l_[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = l_[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * n + k] * l_[j * n + k];
      l_[i * n + j] = s / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) l_[i * n + j] = 0.0;
}

void Cholesky::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * n + k] * rhs[k];
    rhs[i] = s / l_[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l_[k * n + i] * rhs[k];
    rhs[i] = s / l_[i * n + i];
  }
}

}  // namespace gapbench
