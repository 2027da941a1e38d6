#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gapbench/errors.hpp"
#include "gapbench/metric.hpp"
#include "support.hpp"

using namespace gapbench;

namespace {

// Found by seeded random search over sparse graph metrics; min Gram eigenvalue ~ -0.095.
const std::vector<std::vector<double>> kNotNegativeType = {
    {0, 0.8, 1.2, 1.6, 1.7}, {0.8, 0, 2, 0.8, 0.9}, {1.2, 2, 0, 1.2, 1.1}, {1.6, 0.8, 1.2, 0, 1.7}, {1.7, 0.9, 1.1, 1.7, 0}};

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) { return (a - b).max_abs(); }

SymMatrix random_sym(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.at(i, j) = rng.uniform(-1, 1);
  return m;
}

}  // namespace

TEST_CASE("check_metric") {
  SUBCASE("equilateral triangle has no violations") {
    const auto d = FiniteMetric::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(check_metric(d).empty());
  }
  SUBCASE("3 > 1 + 1 is reported with slack -1") {
    const auto d = FiniteMetric::from_rows({{0, 3, 1}, {3, 0, 1}, {1, 1, 0}});
    const auto v = check_metric(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].i == 0);
    CHECK(v[0].j == 1);
    CHECK(v[0].k == 2);
    CHECK(v[0].slack == doctest::Approx(-1.0));
    CHECK_THROWS_AS(require_metric(d), PreconditionError);
  }
  SUBCASE("rho on random points is a metric") {
    for (std::uint64_t s = 0; s < 20; ++s) CHECK(check_metric(fixtures::random_rho_metric(10, s)).empty());
  }
  SUBCASE("asymmetric input is structural") {
    CHECK_THROWS_AS(FiniteMetric::from_rows({{0, 1}, {2, 0}}), StructuralError);
    CHECK_THROWS_AS(FiniteMetric::from_rows({{0, 1}, {1, 0}, {1, 1}}), StructuralError);
  }
}

TEST_CASE("gram_from_sqrt_metric") {
  SUBCASE("equilateral, base 0") {
    const auto d = FiniteMetric::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    const auto g = gram_from_sqrt_metric(d, 0);
    const double want[3][3] = {{0, 0, 0}, {0, 1, 0.5}, {0, 0.5, 1}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(g(i, j) == doctest::Approx(want[i][j]));
  }
  SUBCASE("two points are always PSD") {
    const auto d = FiniteMetric::from_rows({{0, 3.5}, {3.5, 0}});
    CHECK(sym_eigen(gram_from_sqrt_metric(d, 1)).values.back() >= -1e-12);
  }
  SUBCASE("L1 metric of 0, 1, 3 on a line") {
    const auto d = FiniteMetric::from_rows({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}});
    CHECK(sym_eigen(gram_from_sqrt_metric(d, 0)).values.back() >= -1e-12);
  }
}

TEST_CASE("is_negative_type") {
  SUBCASE("every 3-point metric") {
    for (std::uint64_t s = 0; s < 200; ++s) CHECK(is_negative_type(fixtures::random_metric(3, s)).negative_type);
  }
  SUBCASE("rho on 12 random points of {0,1,2}^3") {
    const auto gm = heis::grid_subset(2, 12, 11);
    CHECK(is_negative_type(gm.metric).negative_type);
  }
  SUBCASE("fixture 5-point metric is not negative type") {
    const auto d = FiniteMetric::from_rows(kNotNegativeType);
    require_metric(d);
    const auto r = is_negative_type(d);
    CHECK_FALSE(r.negative_type);
    CHECK(r.min_eigenvalue < -10 * kPsdTol);
    // Oracle from the definition: a zero-sum vector with sum v_i v_j d_ij > 0.
    Rng rng(5);
    double best = -1.0;
    for (int t = 0; t < 20000 && best <= 0.0; ++t) {
      std::vector<double> v(5);
      double mean = 0.0;
      for (auto& x : v) mean += (x = rng.uniform(-1, 1));
      mean /= 5.0;
      for (auto& x : v) x -= mean;
      double q = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) q += v[i] * v[j] * kNotNegativeType[i][j];
      best = std::max(best, q);
    }
    CHECK(best > 0.0);
  }
  SUBCASE("base point does not matter") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto d = s % 2 ? fixtures::random_metric(6, s) : fixtures::random_rho_metric(6, s);
      const bool b0 = is_negative_type(d, kPsdTol, 0).negative_type;
      CHECK(is_negative_type(d, kPsdTol, 2).negative_type == b0);
      CHECK(is_negative_type(d, kPsdTol, 5).negative_type == b0);
    }
    const auto bad = FiniteMetric::from_rows(kNotNegativeType);
    for (std::size_t b = 0; b < 5; ++b) CHECK_FALSE(is_negative_type(bad, kPsdTol, b).negative_type);
  }
  SUBCASE("L1-embeddable metrics are negative type") {
    for (std::uint64_t s = 0; s < 40; ++s)
      CHECK(is_negative_type(fixtures::random_cut_metric(3 + s % 8, s)).negative_type);
  }
}

TEST_CASE("sym_eigen") {
  SUBCASE("identity") {
    const auto e = sym_eigen(SymMatrix::identity(3));
    for (double v : e.values) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("diag(2, -1)") {
    SymMatrix m(2);
    m.at(0, 0) = 2;
    m.at(1, 1) = -1;
    const auto e = sym_eigen(m);
    CHECK(e.values[0] == doctest::Approx(2.0));
    CHECK(e.values[1] == doctest::Approx(-1.0));
  }
  SUBCASE("[[0,1],[1,0]]") {
    SymMatrix m(2);
    m.at(0, 1) = 1;
    const auto e = sym_eigen(m);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(-1.0));
  }
  SUBCASE("reconstruction on random matrices") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const std::size_t n = 2 + s % 12;
      const auto m = random_sym(n, s);
      const auto e = sym_eigen(m);
      for (std::size_t k = 1; k < n; ++k) CHECK(e.values[k - 1] >= e.values[k]);
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s2 = 0.0;
          for (std::size_t k = 0; k < n; ++k) s2 += e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k];
          worst = std::max(worst, std::abs(s2 - m(i, j)));
        }
      CHECK(worst < 1e-10 * std::max(1.0, m.frobenius_norm()));
    }
  }
}

TEST_CASE("psd_project") {
  SUBCASE("PSD input is a fixed point") {
    SymMatrix m(2);
    m.at(0, 0) = 2;
    m.at(0, 1) = 1;
    m.at(1, 1) = 2;
    CHECK(max_abs_diff(psd_project(m), m) < 1e-10);
  }
  SUBCASE("diag(1, -2)") {
    SymMatrix m(2);
    m.at(0, 0) = 1;
    m.at(1, 1) = -2;
    const auto p = psd_project(m);
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(p(1, 1)) < 1e-12);
    CHECK(std::abs(p(0, 1)) < 1e-12);
  }
  SUBCASE("[[0,1],[1,0]] -> [[1/2,1/2],[1/2,1/2]]") {
    SymMatrix m(2);
    m.at(0, 1) = 1;
    const auto p = psd_project(m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(p(i, j) == doctest::Approx(0.5));
  }
  SUBCASE("idempotent and nonexpansive") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const std::size_t n = 2 + s % 7;
      const auto a = random_sym(n, 2 * s), b = random_sym(n, 2 * s + 1);
      const auto pa = psd_project(a), pb = psd_project(b);
      CHECK(max_abs_diff(psd_project(pa), pa) < 1e-10);
      CHECK((pa - pb).frobenius_norm() <= (a - b).frobenius_norm() + 1e-12);
    }
  }
}
