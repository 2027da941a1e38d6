#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "gapbench/errors.hpp"
#include "gapbench/sparsestcut.hpp"
#include "support.hpp"

using namespace gapbench;
using namespace gapbench::sparsest;

namespace {

// Plain subset loop, no Gray code, no canonical masks.
double brute(const DemandInstance& inst) {
  const std::size_t n = inst.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t s = 1; s + 1 < (1U << n); ++s) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (((s >> i) ^ (s >> j)) & 1U) {
          num += inst.c(i, j);
          den += inst.d(i, j);
        }
    if (den > 0.0) best = std::min(best, num / den);
  }
  return best;
}

}  // namespace

TEST_CASE("phi on single cuts") {
  const auto inst = fixtures::four_cycle();
  CHECK(*phi(0b0011, inst) == doctest::Approx(0.5));
  CHECK(*phi(0b0001, inst) == doctest::Approx(2.0 / 3.0));
  CHECK(*phi(0b0101, inst) == doctest::Approx(1.0));
  // demand only between 1 and 2: the cut {0} separates none of it
  const DemandInstance one_pair(3, {0, 1, 1, 1, 0, 1, 1, 1, 0}, {0, 0, 0, 0, 0, 1, 0, 1, 0});
  CHECK_FALSE(phi(0b001, one_pair).has_value());
  CHECK(*phi(0b011, one_pair) == doctest::Approx(2.0));
  CHECK_THROWS_AS(phi(0b111, one_pair), DomainError);
}

TEST_CASE("phi_star examples") {
  SUBCASE("4-cycle") {
    const auto r = phi_star(fixtures::four_cycle());
    CHECK(r.value == doctest::Approx(0.5));
    CHECK((r.argmin == 0b0011 || r.argmin == 0b1001));
    CHECK((r.argmin & 1U) == 1U);
  }
  SUBCASE("C = D gives 1") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto base = fixtures::random_instance(6, s);
      const DemandInstance inst(6, base.demands(), base.demands());
      CHECK(phi_star(inst).value == doctest::Approx(1.0));
    }
  }
  SUBCASE("empty graph gives 0") {
    const auto inst = uniform_instance_from_edges(5, {});
    CHECK(phi_star(inst).value == 0.0);
  }
  SUBCASE("K4 gives 1") {
    const auto inst = uniform_instance_from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(phi_star(inst).value == doctest::Approx(1.0));
  }
  SUBCASE("an instance without demand is rejected") {
    const std::size_t n = 4;
    CHECK_THROWS_AS(DemandInstance(n, std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)),
                    StructuralError);
  }
}

TEST_CASE("phi_star properties") {
  SUBCASE("agrees with the brute-force loop") {
    for (std::uint64_t s = 0; s < 40; ++s) {
      const auto inst = fixtures::random_instance(3 + s % 8, s);
      CHECK(phi_star(inst).value == doctest::Approx(brute(inst)).epsilon(1e-12));
    }
  }
  SUBCASE("homogeneity Phi*(aC, bD) = (a/b) Phi*(C, D)") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto inst = fixtures::random_instance(7, s);
      CHECK(phi_star(inst.scaled(3.0, 0.25)).value == doctest::Approx(12.0 * phi_star(inst).value));
    }
  }
  SUBCASE("thread count does not change the result") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto inst = fixtures::random_instance(14, s);
      const auto a = phi_star(inst, 1), b = phi_star(inst, 4);
      CHECK(a.value == b.value);
      CHECK(a.argmin == b.argmin);
    }
  }
  SUBCASE("L1 configurations never beat Phi*") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto inst = fixtures::random_instance(8, s);
      CHECK(phi_star_l1_check(inst, 200, s) >= -1e-12);
    }
  }
  SUBCASE("ratio on any metric is at least Phi*/c1") {
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto inst = fixtures::random_instance(7, s);
      const auto d = fixtures::random_rho_metric(7, 100 + s);
      const double c1 = cutcone::c1_exact(d).c1;
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) {
          num += inst.c(i, j) * d(i, j);
          den += inst.d(i, j) * d(i, j);
        }
      CHECK(num / den >= phi_star(inst).value / c1 - 1e-9);
    }
  }
}

TEST_CASE("instances") {
  CHECK_THROWS_AS(DemandInstance(2, {0, -1, -1, 0}, {0, 1, 1, 0}), StructuralError);
  CHECK_THROWS_AS(DemandInstance(2, {0, 1, 2, 0}, {0, 1, 1, 0}), StructuralError);
  CHECK_THROWS_AS(DemandInstance(2, {0, 1}, {0, 1, 1, 0}), StructuralError);
  const auto inst = uniform_instance(3, {0, 1, 0, 1, 0, 1, 0, 1, 0});
  CHECK(inst.c(0, 1) == 1.0);
  CHECK(inst.c(0, 2) == 0.0);
  CHECK(inst.d(0, 2) == 1.0);
  CHECK(inst.d(1, 1) == 0.0);
}
