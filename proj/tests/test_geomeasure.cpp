#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gapbench/errors.hpp"
#include "gapbench/geomeasure.hpp"
#include "gapbench/random.hpp"

using namespace gapbench;
using namespace gapbench::geo;

namespace {

const HBall kUnit{{0, 0, 0}, 1.0};

VoxelSet on_ball(const Predicate& p, const HBall& ball, double h) {
  return voxelize(p, heis::bounding_box(ball), h);
}

// |I sym-diff E| minimized over I with endpoints among the trace breakpoints, times sqrt(2).
double brute_nc(const LineTrace& tr) {
  std::vector<double> cuts{tr.t0, tr.t1};
  for (const auto& iv : tr.intervals) {
    cuts.push_back(iv.a);
    cuts.push_back(iv.b);
  }
  const double e = tr.covered();
  double best = e;  // I empty
  for (double a : cuts)
    for (double b : cuts) {
      if (b <= a) continue;
      double inside = 0.0;
      for (const auto& iv : tr.intervals) inside += std::max(0.0, std::min(b, iv.b) - std::max(a, iv.a));
      best = std::min(best, e + (b - a) - 2.0 * inside);
    }
  return kLineSpeed * best;
}

double angle_deg(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double c = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("voxelize") {
  SUBCASE("always-false and always-true") {
    const Box3 box{{0, 0, 0}, {1, 1, 1}};
    CHECK(voxelize([](const HPoint&) { return false; }, box, 0.1).count() == 0);
    const auto full = voxelize([](const HPoint&) { return true; }, box, 0.1);
    CHECK(full.count() == full.grid().size());
    CHECK(full.grid().nx == 10);
    CHECK(full.grid().nz == 100);
  }
  SUBCASE("half-space z >= 0 on a symmetric box fills half") {
    const Box3 box{{-1, -1, -1}, {1, 1, 1}};
    const auto s = voxelize([](const HPoint& p) { return p.z >= 0; }, box, 0.1);
    CHECK(double(s.count()) / double(s.grid().size()) == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("rho-ball of radius 1/2 against radius 1") {
    const Box3 box = heis::bounding_box(kUnit);
    const auto big = voxelize([](const HPoint& p) { return heis::contains(kUnit, p); }, box, 0.02);
    const HBall half{{0, 0, 0}, 0.5};
    const auto small = voxelize([&](const HPoint& p) { return heis::contains(half, p); }, box, 0.02);
    CHECK(double(small.count()) / double(big.count()) == doctest::Approx(1.0 / 16).epsilon(0.03));
    CHECK(big.measure() == doctest::Approx(heis::ball_volume(1.0)).epsilon(0.02));
  }
  SUBCASE("errors and lookups") {
    const Box3 box{{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(voxelize([](const HPoint&) { return true; }, box, 0.0), DomainError);
    CHECK_THROWS_AS(voxelize([](const HPoint&) { return true; }, box, 1e-4), DomainError);
    const auto s = voxelize([](const HPoint&) { return true; }, box, 0.1);
    CHECK_FALSE(s.contains({1.5, 0.5, 0.5}));
    CHECK_FALSE(s.grid().locate({-0.1, 0.5, 0.5}).has_value());
    CHECK(s.contains({0.5, 0.5, 0.5}));
  }
  SUBCASE("complement and binary round-trip") {
    const auto s = on_ball([](const HPoint& p) { return p.x + p.z > 0.1; }, kUnit, 0.1);
    const auto c = s.complement();
    CHECK(c.count() + s.count() == s.grid().size());
    CHECK(c.complement() == s);
    const auto path = (std::filesystem::temp_directory_path() / "gapbench_test_voxels.gbvx").string();
    s.write(path);
    const auto back = VoxelSet::read(path);
    CHECK(back == s);
    CHECK(back.grid().h == s.grid().h);
    std::ofstream(path, std::ios::binary) << "nope";
    CHECK_THROWS_AS(VoxelSet::read(path), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(VoxelSet::read(path), IoError);
  }
}

TEST_CASE("restrict_to_line") {
  const HorizontalLine through{{0, 0, 0}, 0.0};
  SUBCASE("everything gives the full chord") {
    const auto all = on_ball([](const HPoint&) { return true; }, kUnit, 0.05);
    const auto tr = restrict_to_line(all, through, kUnit);
    const auto ch = heis::chord(through, kUnit);
    REQUIRE(tr.intervals.size() == 1);
    CHECK(tr.intervals[0].a == doctest::Approx(ch->first));
    CHECK(tr.intervals[0].b == doctest::Approx(ch->second));
    CHECK(tr.complement().intervals.empty());
  }
  SUBCASE("half-space crossed once") {
    const auto e = on_ball([](const HPoint& p) { return p.x < 0.1; }, kUnit, 0.05);
    const auto tr = restrict_to_line(e, through, kUnit);
    REQUIRE(tr.intervals.size() == 1);
    CHECK(tr.intervals[0].a == doctest::Approx(tr.t0));
    CHECK(std::abs(tr.intervals[0].b - 0.1) < 0.05);
    CHECK(nm_line(tr) == 0.0);
  }
  SUBCASE("slab window leaves two complement intervals") {
    // z(t) = -0.05 + 0.6 t, inside 0 < z < 0.1 for t in (1/12, 1/4)
    const HorizontalLine l{{0, 0.3, -0.05}, 0.0};
    const auto e = on_ball([](const HPoint& p) { return p.z > 0 && p.z < 0.1; }, kUnit, 0.02);
    const auto tr = restrict_to_line(e, l, kUnit);
    REQUIRE(tr.t0 < 0.0);
    REQUIRE(tr.t1 > 0.3);
    REQUIRE(tr.intervals.size() == 1);
    CHECK(std::abs(tr.intervals[0].a - 1.0 / 12) < 0.02);
    CHECK(std::abs(tr.intervals[0].b - 0.25) < 0.02);
    CHECK(tr.complement().intervals.size() == 2);
    CHECK(nm_line(tr) > 0.0);
  }
  SUBCASE("voxel staircases of tilted planes are not crossings") {
    Rng rng(31);
    for (int k = 0; k < 4; ++k) {
      const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
      const auto e = on_ball([=](const HPoint& p) { return a * p.x + b * p.y + c * p.z >= 0.0; }, kUnit, 0.05);
      for (const auto& l : heis::sample_lines(kUnit, 300, 40 + k).lines) CHECK(nm_line(e, l, kUnit) == 0.0);
    }
  }
  SUBCASE("a line missing the ball") {
    const auto e = on_ball([](const HPoint&) { return true; }, kUnit, 0.1);
    CHECK_THROWS_AS(restrict_to_line(e, {{5, 5, 0}, 0.3}, kUnit), DomainError);
  }
}

TEST_CASE("nc") {
  CHECK(nc(LineTrace{0, 3, {{0.5, 2.0}}}) == 0.0);
  CHECK(nc(LineTrace{0, 3, {{0, 1}, {2, 3}}}) == doctest::Approx(kLineSpeed));
  CHECK(nm_line(LineTrace{0, 3, {{0, 1}}}) == 0.0);
  CHECK(nc(LineTrace{0, 3, {}}) == 0.0);
  // three pieces: keep the two long ones and pay for the short gap between them
  CHECK(nc(LineTrace{0, 10, {{0, 3}, {3.5, 6}, {9, 9.2}}}) == doctest::Approx(kLineSpeed * 0.7));
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    LineTrace tr{0, 10, {}};
    double cur = rng.uniform(0, 1);
    while (cur < 10) {
      const double b = std::min(10.0, cur + rng.uniform(0.05, 2));
      tr.intervals.push_back({cur, b});
      cur = b + rng.uniform(0.05, 2);
    }
    CHECK(nc(tr) == doctest::Approx(brute_nc(tr)).epsilon(1e-12).scale(1.0));
    CHECK(nc(tr.complement()) == doctest::Approx(brute_nc(tr.complement())).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("nm_ball") {
  const auto sample = heis::sample_lines(kUnit, 2000, 5);
  SUBCASE("half-spaces sit below the noise floor") {
    const std::vector<Predicate> planes = {[](const HPoint& p) { return p.x >= 0.1; },
                                           [](const HPoint& p) { return p.z >= 0.2; },
                                           [](const HPoint& p) { return p.x + 0.5 * p.y - p.z >= 0; }};
    for (const auto& pl : planes) {
      const auto mc = nm_ball(on_ball(pl, kUnit, 0.05), kUnit, sample);
      CHECK(mc.mean <= 3 * mc.std_error);
    }
  }
  SUBCASE("the central slab is above it") {
    const auto mc = nm_ball(on_ball([](const HPoint& p) { return std::abs(p.z) < 0.1; }, kUnit, 0.05), kUnit, sample);
    CHECK(mc.mean > 3 * mc.std_error);
    CHECK(mc.samples == 2000);
  }
  SUBCASE("empty set") {
    CHECK(nm_ball(on_ball([](const HPoint&) { return false; }, kUnit, 0.1), kUnit, sample).mean == 0.0);
  }
  SUBCASE("dilation invariance") {
    const HBall big{{0, 0, 0}, 2.0};
    const auto big_sample = heis::sample_lines(big, 2000, 5);
    const auto a = nm_ball(on_ball([](const HPoint& p) { return std::abs(p.z) < 0.1; }, kUnit, 0.05), kUnit, sample);
    const auto b = nm_ball(on_ball([](const HPoint& p) { return std::abs(p.z) < 0.4; }, big, 0.1), big, big_sample);
    CHECK(std::abs(a.mean - b.mean) <= 2 * std::hypot(a.std_error, b.std_error));
  }
  SUBCASE("threads do not change the result") {
    const auto e = on_ball([](const HPoint& p) { return std::abs(p.z) < 0.1; }, kUnit, 0.05);
    const auto a = nm_ball(e, kUnit, sample, 1), b = nm_ball(e, kUnit, sample, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
  }
}

TEST_CASE("length classes") {
  CHECK(class_count(0.1) == 12);
  CHECK(class_count(0.25) == 6);
  CHECK_THROWS_AS(class_count(0.5), DomainError);
  CHECK_THROWS_AS(class_count(0.0), DomainError);
  const std::size_t k = class_count(0.1);
  CHECK(length_class(2.0, 1.0, 0.1, k) == 0);
  CHECK(length_class(1.0, 1.0, 0.1, k) == 0);
  CHECK(length_class(0.2, 1.0, 0.1, k) == 1);   // q = 0.1 is the closed end of class 1
  CHECK(length_class(0.21, 1.0, 0.1, k) == 0);
  CHECK(length_class(0.02, 1.0, 0.1, k) == 2);
  CHECK(length_class(0.05, 0.5, 0.1, k) == 1);
  CHECK(length_class(0.0, 1.0, 0.1, k) == k - 1);
  CHECK(length_class(1e-30, 1.0, 0.1, k) == k - 1);
}

TEST_CASE("perimeter_kinematic") {
  const auto sample = heis::sample_lines(kUnit, 1500, 6);
  SUBCASE("partition identity") {
    const std::vector<Predicate> sets = {[](const HPoint& p) { return p.x >= 0.1; },
                                         [](const HPoint& p) { return std::abs(p.z) < 0.1; },
                                         [](const HPoint& p) { return heis::rho({0.1, 0, 0}, p) < 0.4; },
                                         [](const HPoint& p) { return std::sin(6 * p.x) + p.z > 0.2; }};
    for (const auto& s : sets) {
      const auto rep = perimeter_kinematic(on_ball(s, kUnit, 0.05), kUnit, sample, 0.1);
      double sum = 0.0;
      for (double w : rep.scales.weights) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - rep.per) <= 1e-9 * std::max(1.0, rep.per));
      CHECK(rep.per > 0.0);
    }
  }
  SUBCASE("empty set") {
    const auto rep = perimeter_kinematic(on_ball([](const HPoint&) { return false; }, kUnit, 0.1), kUnit, sample, 0.1);
    CHECK(rep.per == 0.0);
    for (double w : rep.scales.weights) CHECK(w == 0.0);
  }
  SUBCASE("gamma scales linearly") {
    const auto e = on_ball([](const HPoint& p) { return p.x >= 0; }, kUnit, 0.05);
    CHECK(perimeter_kinematic(e, kUnit, sample, 0.1, 2.5).per ==
          doctest::Approx(2.5 * perimeter_kinematic(e, kUnit, sample, 0.1).per));
  }
  SUBCASE("doubling the radius") {
    // Mean endpoint count per line is dilation invariant; the line measure of B_r grows as r^3,
    // so the un-normalized endpoint integral scales by 8.
    const HBall big{{0, 0, 0}, 2.0};
    const auto a = perimeter_kinematic(on_ball([](const HPoint& p) { return p.x >= 0; }, kUnit, 0.05), kUnit, sample, 0.1);
    const auto b = perimeter_kinematic(on_ball([](const HPoint& p) { return p.x >= 0; }, big, 0.1), big,
                                       heis::sample_lines(big, 1500, 6), 0.1);
    CHECK(std::abs(a.per - b.per) <= 3 * std::hypot(a.std_error, b.std_error));
    CHECK(8.0 * b.per / a.per == doctest::Approx(8.0).epsilon(0.05));
  }
}

TEST_CASE("cut measures") {
  const Box3 box{{0, 0, 0}, {1, 1, 1}};
  const auto grid = VoxelGrid::over(box, 0.05);
  Rng rng(8);
  auto random_point = [&] { return HPoint{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)}; };

  SUBCASE("single indicator") {
    const VectorMap f = [](const HPoint& p) { return std::vector<double>{p.x > 0.5 ? 1.0 : 0.0}; };
    const auto cm = cut_measure_of_map(f, 1, grid, {{0.0, 1.0}});
    REQUIRE(cm.atoms.size() == 1);
    CHECK(cm.atoms[0].weight == 1.0);
    CHECK(cm.atoms[0].label == "f0>0.000000");
  }
  SUBCASE("f = x with step 0.1") {
    const VectorMap f = [](const HPoint& p) { return std::vector<double>{p.x}; };
    const auto cm = cut_measure_of_map(f, 1, grid, {uniform_thresholds(0, 1, 10)});
    // {x > 0} is the whole box and carries no distance
    CHECK(cm.atoms.size() == 9);
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_point(), q = random_point();
      CHECK(std::abs(cm.distance(p, q) - std::abs(p.x - q.x)) <= 0.1 + 1e-12);
    }
  }
  SUBCASE("f = (x, y) vanishes on central cosets") {
    const auto m = horizontal_projection_map();
    const auto cm = cut_measure_of_map(m.f, 2, grid, {uniform_thresholds(0, 1, 20), uniform_thresholds(0, 1, 20)});
    for (int t = 0; t < 200; ++t) {
      const auto p = random_point();
      CHECK(cm.distance(p, {p.x, p.y, rng.uniform(0, 1)}) == 0.0);
    }
  }
  SUBCASE("representation identity for anchor distances") {
    const auto m = anchor_distance_map({{0.2, 0.3, 0.1}, {0.8, 0.5, 0.9}});
    const auto cm = cut_measure_of_map(m.f, 2, grid, {uniform_thresholds(0, 1.5, 60), uniform_thresholds(0, 1.5, 60)});
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_point(), q = random_point();
      const auto fp = m.f(grid.center(*grid.locate(p))), fq = m.f(grid.center(*grid.locate(q)));
      CHECK(std::abs(cm.distance(p, q) - std::abs(fp[0] - fq[0]) - std::abs(fp[1] - fq[1])) <= 2 * 0.025 + 1e-12);
    }
  }
  SUBCASE("line additivity for half-space measures") {
    const auto m = first_coordinate_map();
    const auto cm = cut_measure_of_map(m.f, 1, grid, {uniform_thresholds(0, 1, 40)});
    for (int t = 0; t < 300; ++t) {
      const HorizontalLine l{{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)}, rng.uniform(-1.2, 1.2)};
      const double t1 = rng.uniform(-0.2, 0.0), t2 = rng.uniform(0.0, 0.1), t3 = rng.uniform(0.1, 0.2);
      const auto a = l.at(t1), b = l.at(t2), c = l.at(t3);
      CHECK(cm.distance(a, c) == doctest::Approx(cm.distance(a, b) + cm.distance(b, c)));
    }
  }
  SUBCASE("threshold errors") {
    const VectorMap f = [](const HPoint& p) { return std::vector<double>{p.x}; };
    CHECK_THROWS_AS(cut_measure_of_map(f, 1, grid, {{0.5, 0.2}}), DomainError);
    CHECK_THROWS_AS(cut_measure_of_map(f, 1, grid, {{0.5}}), DomainError);
    CHECK_THROWS_AS(cut_measure_of_map(f, 2, grid, {{0.1, 0.2}}), StructuralError);
    CHECK_THROWS_AS(uniform_thresholds(1, 0, 3), DomainError);
  }
}

TEST_CASE("split and isoperimetry") {
  const auto sample = heis::sample_lines(kUnit, 800, 7);
  const auto grid = ball_grid(kUnit, 0.05);
  const auto m = first_coordinate_map();
  const auto cm = cut_measure_of_map(m.f, 1, grid, {uniform_thresholds(-0.6, 0.6, 8)});
  SUBCASE("theta limits and the Markov bound") {
    const auto lo = split_cut_measure(cm, 1e-9, kUnit, sample);
    for (double per : lo.perimeters) CHECK(per > 0.0);
    CHECK(lo.d_theta.atoms.size() == cm.atoms.size());
    const auto hi = split_cut_measure(cm, 1e9, kUnit, sample);
    CHECK(hi.d_theta.atoms.empty());
    for (double theta : {0.05, 0.2, 0.5, 1.0}) {
      const auto s = split_cut_measure(cm, theta, kUnit, sample);
      CHECK(s.d_theta.total_weight() <= s.markov_bound + 1e-12);
      CHECK(s.d_theta.atoms.size() + s.remainder.atoms.size() == cm.atoms.size());
    }
    CHECK_THROWS_AS(split_cut_measure(cm, 0.0, kUnit, sample), DomainError);
  }
  SUBCASE("half-space ratio is stable across resolutions") {
    const Predicate half = [](const HPoint& p) { return p.x >= 0; };
    const double a = isoperimetric_ratio(on_ball(half, kUnit, 0.1), kUnit, sample);
    const double b = isoperimetric_ratio(on_ball(half, kUnit, 0.05), kUnit, sample);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) / b < 0.2);
    CHECK(isoperimetric_ratio(on_ball([](const HPoint&) { return false; }, kUnit, 0.1), kUnit, sample) == 0.0);
    // small balls inside stay within a constant of the half-space value
    for (double s : {0.3, 0.5, 0.7}) {
      const HBall inner{{0, 0, 0}, s};
      const double r = isoperimetric_ratio(on_ball([&](const HPoint& p) { return heis::contains(inner, p); }, kUnit, 0.05),
                                           kUnit, sample);
      CHECK(r > 0.0);
      CHECK(r < 10 * b);
    }
  }
}

TEST_CASE("select_scale") {
  const auto sample = heis::sample_lines(kUnit, 800, 9);
  const auto grid = ball_grid(kUnit, 0.05);
  SUBCASE("single half-space atom selects j = 1") {
    CutMeasure cm;
    cm.atoms.push_back({on_ball([](const HPoint& p) { return p.x >= 0; }, kUnit, 0.05), 1.0, "x>0"});
    const auto sel = select_scale(cm, kUnit, sample, 0.1);
    CHECK(sel.j == 1);
    CHECK(sel.decomposition.weights[1] <= sel.class_budget);
    CHECK(sel.local_weight <= sel.local_budget);
    CHECK(heis::rho(kUnit.center, sel.y) <= kUnit.radius * (1 - 0.1) + 1e-9);
  }
  SUBCASE("empty measure") {
    const auto sel = select_scale(CutMeasure{}, kUnit, sample, 0.1);
    CHECK(sel.j == 0);
    CHECK(sel.total == 0.0);
  }
  SUBCASE("f = x with 10 thresholds meets both budgets") {
    const auto m = first_coordinate_map();
    const auto cm = cut_measure_of_map(m.f, 1, grid, {uniform_thresholds(-0.7, 0.7, 10)});
    const auto sel = select_scale(cm, kUnit, sample, 0.1);
    CHECK(sel.decomposition.weights[sel.j] <= sel.class_budget);
    CHECK(sel.local_weight <= sel.local_budget);
    CHECK(sel.candidates.size() <= ScaleConstants{}.max_candidates);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : sel.candidates) best = std::min(best, c.weight);
    CHECK(sel.local_weight == best);
  }
  SUBCASE("impossible budgets report the table") {
    CutMeasure cm;
    cm.atoms.push_back({on_ball([](const HPoint& p) { return p.x >= 0; }, kUnit, 0.05), 1.0, "x>0"});
    ScaleConstants tight;
    tight.c1 = -1.0;
    try {
      select_scale(cm, kUnit, sample, 0.1, tight);
      FAIL("expected a selection error");
    } catch (const DomainError& e) {
      CHECK(e.details().count("w_0") == 1);
      CHECK(e.details().count("total") == 1);
    }
  }
}

TEST_CASE("fit_halfspace") {
  SUBCASE("exact half-space is recovered") {
    const std::array<double, 3> n{0.6, 0.0, 0.8};
    const auto e = on_ball([&](const HPoint& p) { return n[0] * p.x + n[1] * p.y + n[2] * p.z >= 0.1; }, kUnit, 0.05);
    const auto fit = fit_halfspace(e, kUnit);
    CHECK(fit.symdiff < 0.01);
    CHECK(angle_deg(fit.plane.normal, n) < 5.0);
  }
  SUBCASE("5% of voxels flipped") {
    const std::array<double, 3> n{1.0, 0.0, 0.0};
    auto e = on_ball([](const HPoint& p) { return p.x >= 0.05; }, kUnit, 0.05);
    Rng rng(12);
    for (std::size_t i = 0; i < e.grid().size(); ++i)
      if (rng.uniform() < 0.05) e.set(i, !e.test(i));
    const auto fit = fit_halfspace(e, kUnit);
    CHECK(angle_deg(fit.plane.normal, n) < 5.0);
    CHECK(fit.symdiff == doctest::Approx(0.05).epsilon(0.2));
  }
  SUBCASE("off-center ball uses normalized coordinates") {
    const HBall ball{{0.5, -0.3, 0.2}, 0.8};
    const auto e = voxelize([&](const HPoint& p) { return normalize(ball, p).y >= 0.0; }, heis::bounding_box(ball), 0.04);
    const auto fit = fit_halfspace(e, ball);
    CHECK(fit.symdiff < 0.01);
    CHECK(angle_deg(fit.plane.normal, {0, 1, 0}) < 5.0);
    const HPoint q{0.1, 0.2, -0.3};
    const auto back = normalize(ball, denormalize(ball, q));
    CHECK(back.x == doctest::Approx(q.x));
    CHECK(back.y == doctest::Approx(q.y));
    CHECK(back.z == doctest::Approx(q.z));
  }
  SUBCASE("no half-space fits the central slab") {
    const auto e = on_ball([](const HPoint& p) { return std::abs(p.z) < 0.15; }, kUnit, 0.05);
    CHECK(fit_halfspace(e, kUnit).symdiff >= 0.2);
  }
}

TEST_CASE("collapse_search") {
  const auto samples = central_samples(kUnit, 6, 9);
  SUBCASE("central samples") {
    for (const auto& p : samples) CHECK(heis::contains(kUnit, p));
    CHECK_THROWS_AS(central_samples(kUnit, 3, 1), DomainError);
  }
  SUBCASE("f = (x, y) collapses completely") {
    const auto m = horizontal_projection_map();
    CHECK(validate_lipschitz(m, samples) <= 1.0 + 1e-9);
    for (int k = 2; k <= 6; ++k) {
      const double eps = std::ldexp(1.0, -k);
      for (auto s : {CollapseStrategy::GridScan, CollapseStrategy::SegmentPartition}) {
        const auto r = collapse_search(m, samples, kUnit, eps, s);
        CHECK(r.ratio == 0.0);
        CHECK(r.r >= eps);
        CHECK(heis::same_central_coset(r.p, r.q));
      }
    }
  }
  SUBCASE("ratio is non-increasing as epsilon shrinks") {
    for (const auto& m : {first_coordinate_map(), anchor_distance_map({{0.3, 0.1, 0.2}, {-0.4, 0.2, -0.1}})}) {
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 2; k <= 6; ++k) {
        const auto r = collapse_search(m, samples, kUnit, std::ldexp(1.0, -k), CollapseStrategy::GridScan);
        CHECK(r.ratio >= 0.0);
        CHECK(r.ratio <= prev + 1e-15);
        prev = r.ratio;
      }
    }
  }
  SUBCASE("non-Lipschitz maps are rejected") {
    const LipschitzMap twice{"2x", 1, [](const HPoint& p) { return std::vector<double>{2 * p.x}; }};
    CHECK_THROWS_AS(validate_lipschitz(twice, samples), PreconditionError);
    CHECK_THROWS_AS(collapse_search(twice, samples, kUnit, 0.25, CollapseStrategy::GridScan), PreconditionError);
  }
  SUBCASE("segment blocks") {
    ExperimentConfig cfg;
    // sqrt(0.16 / 3) ~ 0.23: one block pair at 1/8, none at 1/4
    CHECK(segment_blocks(0.125, 1.0, cfg) == 1);
    CHECK(segment_blocks(0.25, 1.0, cfg) == 0);
    cfg.exp_n = 0.5;
    const auto n = segment_blocks(0.01, 1.0, cfg);
    CHECK(n >= 1);
    CHECK(std::sqrt(cfg.h_u / double(2 * n + 1)) >= 0.01);
    CHECK_THROWS_AS(segment_blocks(0.0, 1.0, cfg), DomainError);
  }
  CHECK(std::string(to_string(CollapseStrategy::GridScan)) == "grid-scan");
  CHECK(std::string(to_string(CollapseStrategy::SegmentPartition)) == "segment-partition");
}
