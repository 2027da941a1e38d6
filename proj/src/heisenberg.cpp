#include "gapbench/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "gapbench/errors.hpp"
#include "gapbench/random.hpp"

namespace gapbench::heis {

HPoint h_mul(const HPoint& g, const HPoint& h) noexcept {
  return {g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y - g.y * h.x};
}

HPoint h_inv(const HPoint& g) noexcept { return {-g.x, -g.y, -g.z}; }

HPoint h_dilate(double s, const HPoint& g) {
  if (!(s > 0.0)) throw DomainError("dilation factor must be positive").with("s", s);
  return {s * g.x, s * g.y, s * s * g.z};
}

double rho(const HPoint& p, const HPoint& q) noexcept {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double r2 = dx * dx + dy * dy;
  const double w = q.z - p.z + 2.0 * p.x * q.y - 2.0 * p.y * q.x;
  return std::sqrt(std::hypot(r2, w) + r2);
}

HPoint rho_mul(const HPoint& g, const HPoint& h) noexcept {
  return {g.x + h.x, g.y + h.y, g.z + h.z - 2.0 * (g.x * h.y - g.y * h.x)};
}

HPoint to_rho_frame(const HPoint& g) noexcept { return {g.x, g.y, -2.0 * g.z}; }

double left_invariance_defect(const HPoint& g, const HPoint& p, const HPoint& q) noexcept {
  return std::abs(rho(h_mul(g, p), h_mul(g, q)) - rho(p, q));
}

bool same_central_coset(const HPoint& p, const HPoint& q, double tol) noexcept {
  return std::abs(p.x - q.x) <= tol && std::abs(p.y - q.y) <= tol;
}

HBall make_ball(const HPoint& center, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive").with("radius", radius);
  return {center, radius};
}

bool contains(const HBall& ball, const HPoint& p) noexcept { return rho(ball.center, p) < ball.radius; }

HBall dilate(double s, const HBall& ball) { return make_ball(h_dilate(s, ball.center), s * ball.radius); }

Box3 bounding_box(const HBall& ball) noexcept {
  const auto& c = ball.center;
  const double r = ball.radius;
  const double hx = r / std::numbers::sqrt2;
  const double hz = std::sqrt(r * r * r * r + 2.0 * r * r * (c.x * c.x + c.y * c.y));
  return {{c.x - hx, c.y - hx, c.z - hz}, {c.x + hx, c.y + hx, c.z + hz}};
}

double ball_volume(double radius) noexcept {
  return 2.0 * std::numbers::pi / 3.0 * radius * radius * radius * radius;
}

// ---------------------------------------------------------------------------

namespace {

struct IPointHash {
  std::size_t operator()(const IPoint& p) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(p.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(p.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

IPoint i_mul(const IPoint& g, const IPoint& h) noexcept {
  return {g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y - g.y * h.x};
}

constexpr std::array<IPoint, 6> kGenerators{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

// Breadth-first search from the identity; `visit` returns true to stop.
template <class Visit>
std::size_t bfs_from_identity(int depth_cap, std::size_t state_cap, Visit&& visit) {
  std::unordered_map<IPoint, int, IPointHash> dist;
  std::vector<IPoint> frontier{{0, 0, 0}};
  dist.emplace(IPoint{0, 0, 0}, 0);
  if (visit(IPoint{0, 0, 0}, 0)) return dist.size();
  for (int depth = 1; depth <= depth_cap && !frontier.empty(); ++depth) {
    std::vector<IPoint> next;
    for (const auto& g : frontier) {
      for (const auto& s : kGenerators) {
        const IPoint h = i_mul(g, s);
        if (dist.emplace(h, depth).second) {
          if (visit(h, depth)) return dist.size();
          next.push_back(h);
          if (dist.size() >= state_cap) return dist.size();
        }
      }
    }
    frontier = std::move(next);
  }
  return dist.size();
}

}  // namespace

WordDistance word_metric(const IPoint& g, const IPoint& h, int cap, std::size_t state_cap) {
  const IPoint ginv{-g.x, -g.y, -g.z};
  const IPoint target = i_mul(ginv, h);
  WordDistance out;
  out.visited = bfs_from_identity(cap, state_cap, [&](const IPoint& p, int depth) {
    if (p == target) {
      out.distance = depth;
      return true;
    }
    return false;
  });
  return out;
}

std::vector<int> word_lengths_in_cube(int k, std::size_t state_cap) {
  if (k < 0) throw DomainError("cube half-width must be nonnegative");
  const std::int64_t side = 2 * k + 1;
  std::vector<int> lengths(static_cast<std::size_t>(side * side * side), -1);
  std::size_t remaining = lengths.size();
  auto index = [&](const IPoint& p) -> std::optional<std::size_t> {
    if (std::abs(p.x) > k || std::abs(p.y) > k || std::abs(p.z) > k) return std::nullopt;
    return static_cast<std::size_t>(((p.x + k) * side + (p.y + k)) * side + (p.z + k));
  };
  bfs_from_identity(std::numeric_limits<int>::max(), state_cap, [&](const IPoint& p, int depth) {
    if (auto i = index(p)) {
      lengths[*i] = depth;
      --remaining;
    }
    return remaining == 0;
  });
  if (remaining != 0)
    throw DomainError("word-metric BFS state cap reached before covering the cube")
        .with("remaining", static_cast<double>(remaining));
  return lengths;
}

// ---------------------------------------------------------------------------

GridMetric metric_on(const std::vector<HPoint>& points) {
  const std::size_t n = points.size();
  if (n > kMaxMetricPoints)
    throw DomainError("too many points for a dense metric; sample a subset instead")
        .with("points", static_cast<double>(n))
        .with("cap", static_cast<double>(kMaxMetricPoints));
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = rho(points[i], points[j]);
  return {points, FiniteMetric(n, std::move(d))};
}

namespace {

std::vector<HPoint> integer_grid(int k) {
  std::vector<HPoint> pts;
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k; ++b)
      for (int c = 0; c <= k; ++c) pts.push_back({double(a), double(b), double(c)});
  return pts;
}

void check_grid_side(int k) {
  if (k < 1) throw DomainError("grid side k must be at least 1").with("k", k);
}

}  // namespace

GridMetric grid_metric(int k) {
  check_grid_side(k);
  const std::size_t count = static_cast<std::size_t>(k + 1) * (k + 1) * (k + 1);
  if (count > kMaxMetricPoints)
    throw DomainError("full grid exceeds 64 points; use grid_subset")
        .with("k", k)
        .with("points", static_cast<double>(count));
  return metric_on(integer_grid(k));
}

GridMetric grid_subset(int k, std::size_t count, std::uint64_t seed) {
  check_grid_side(k);
  auto all = integer_grid(k);
  if (count < 2 || count > all.size() || count > kMaxMetricPoints)
    throw DomainError("subset size must lie in [2, min(64, (k+1)^3)]").with("count", static_cast<double>(count));
  Rng rng(seed);
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<HPoint> pts;
  for (auto i : idx) pts.push_back(all[i]);
  return metric_on(pts);
}

std::vector<HPoint> scaled_grid_points(int k) {
  check_grid_side(k);
  auto pts = integer_grid(k);
  for (auto& p : pts) p = {p.x / k, p.y / k, p.z / (double(k) * k)};
  return pts;
}

// ---------------------------------------------------------------------------

HPoint HorizontalLine::at(double t) const noexcept {
  return rho_mul(base, {t * std::cos(theta), t * std::sin(theta), 0.0});
}

double HorizontalLine::z_slope() const noexcept {
  return -2.0 * (base.x * std::sin(theta) - base.y * std::cos(theta));
}

std::optional<std::pair<double, double>> chord(const HorizontalLine& line, const HBall& ball) noexcept {
  const double c = std::cos(line.theta);
  const double s = std::sin(line.theta);
  const auto& o = ball.center;
  const auto& b = line.base;
  const double r2 = ball.radius * ball.radius;
  const double dx0 = b.x - o.x;
  const double dy0 = b.y - o.y;
  // w(t) = w0 + t w1 along the line
  const double w0 = b.z - o.z + 2.0 * o.x * b.y - 2.0 * o.y * b.x;
  const double w1 = line.z_slope() + 2.0 * o.x * s - 2.0 * o.y * c;
  const double qa = 2.0 * r2 + w1 * w1;
  const double qb = 4.0 * r2 * (dx0 * c + dy0 * s) + 2.0 * w0 * w1;
  const double qc = 2.0 * r2 * (dx0 * dx0 + dy0 * dy0) + w0 * w0 - r2 * r2;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (!(disc > 0.0)) return std::nullopt;
  const double sq = std::sqrt(disc);
  // numerically stable roots
  const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
  double t1 = q / qa;
  double t2 = q != 0.0 ? qc / q : -t1;
  if (t1 > t2) std::swap(t1, t2);
  return std::make_pair(t1, t2);
}

LineSample sample_lines(const HBall& ball, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw DomainError("line sample count must be positive");
  const Box3 box = bounding_box(ball);
  Rng rng(seed);
  LineSample out;
  out.seed = seed;
  out.region = ball;
  out.lines.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = count * 1000;
  while (out.lines.size() < count) {
    if (++attempts > max_attempts)
      throw DomainError("line rejection rate exceeded 99.9%").with("attempts", static_cast<double>(attempts));
    HorizontalLine line;
    line.base = {rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1]),
                 rng.uniform(box.lo[2], box.hi[2])};
    line.theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (chord(line, ball)) out.lines.push_back(line);
  }
  out.weight = 1.0 / static_cast<double>(count);
  return out;
}

}  // namespace gapbench::heis
