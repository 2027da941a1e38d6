#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "gapbench/metric.hpp"

namespace gapbench::heis {

/// Point of the Heisenberg group, realized on R^3.
struct HPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const HPoint&, const HPoint&) = default;
};

inline constexpr HPoint kIdentity{0.0, 0.0, 0.0};

/// (a,b,c)(α,β,γ) = (a+α, b+β, c+γ+aβ-bα).
HPoint h_mul(const HPoint& g, const HPoint& h) noexcept;
HPoint h_inv(const HPoint& g) noexcept;
/// (s x, s y, s^2 z); throws DomainError for s <= 0.
HPoint h_dilate(double s, const HPoint& g);

/// The explicit negative-type metric
///   rho(p, q) = ( sqrt(r^4 + w^2) + r^2 )^{1/2},
/// r^2 = (qx-px)^2 + (qy-py)^2, w = qz - pz + 2 px qy - 2 py qx.
double rho(const HPoint& p, const HPoint& q) noexcept;

/// Group law (a+α, b+β, c+γ-2(aβ-bα)); rho is exactly left-invariant under it.
HPoint rho_mul(const HPoint& g, const HPoint& h) noexcept;
/// Isomorphism (x, y, z) -> (x, y, -2z) carrying h_mul onto rho_mul.
HPoint to_rho_frame(const HPoint& g) noexcept;

/// |rho(g p, g q) - rho(p, q)| with the plain group law h_mul.
double left_invariance_defect(const HPoint& g, const HPoint& p, const HPoint& q) noexcept;

bool same_central_coset(const HPoint& p, const HPoint& q, double tol = 1e-12) noexcept;

/// Open rho-ball. Every such ball is a (sheared) ellipsoid:
/// 2R^2 (dx^2 + dy^2) + w^2 < R^4 with w as in rho().
struct HBall {
  HPoint center;
  double radius = 1.0;
};

HBall make_ball(const HPoint& center, double radius);
bool contains(const HBall& ball, const HPoint& p) noexcept;
HBall dilate(double s, const HBall& ball);

struct Box3 {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  bool contains(const HPoint& p) const noexcept {
    return p.x >= lo[0] && p.x <= hi[0] && p.y >= lo[1] && p.y <= hi[1] && p.z >= lo[2] && p.z <= hi[2];
  }
};

/// Tight axis-aligned bounding box of the ball.
Box3 bounding_box(const HBall& ball) noexcept;
/// Lebesgue measure of a rho-ball: (2 pi / 3) R^4.
double ball_volume(double radius) noexcept;

// ---------------------------------------------------------------------------
// Word metric

struct IPoint {
  std::int64_t x = 0, y = 0, z = 0;
  friend bool operator==(const IPoint&, const IPoint&) = default;
};

struct WordDistance {
  std::optional<int> distance;  // empty when the BFS cap was hit first
  std::size_t visited = 0;
};

inline constexpr std::size_t kWordMetricStateCap = 1'000'000;

/// Shortest-path distance in the Cayley graph of the generators
/// (±1,0,0), (0,±1,0), (0,0,±1) under h_mul. `cap` bounds the depth.
WordDistance word_metric(const IPoint& g, const IPoint& h, int cap,
                         std::size_t state_cap = kWordMetricStateCap);

/// Word lengths |g| of every g in {-k..k}^3, via one BFS from the identity.
/// Indexed by ((gx+k)(2k+1) + (gy+k))(2k+1) + (gz+k).
std::vector<int> word_lengths_in_cube(int k, std::size_t state_cap = kWordMetricStateCap);

// ---------------------------------------------------------------------------
// Grids

struct GridMetric {
  std::vector<HPoint> points;
  FiniteMetric metric;
};

inline constexpr std::size_t kMaxMetricPoints = 64;

GridMetric metric_on(const std::vector<HPoint>& points);
/// All of {0..k}^3 with pairwise rho; requires (k+1)^3 <= 64.
GridMetric grid_metric(int k);
/// `count` distinct points of {0..k}^3 drawn with the given seed.
GridMetric grid_subset(int k, std::size_t count, std::uint64_t seed);
/// The scaled grid {0..k}/k x {0..k}/k x {0..k}/k^2.
std::vector<HPoint> scaled_grid_points(int k);

// ---------------------------------------------------------------------------
// Horizontal lines

struct HorizontalLine {
  HPoint base;
  double theta = 0.0;

  /// rho_mul(base, (t cosθ, t sinθ, 0)); rho-length sqrt(2)|dt|.
  HPoint at(double t) const noexcept;
  /// dz/dt along the line: -2 (base.x sinθ - base.y cosθ).
  double z_slope() const noexcept;
};

/// Parameter interval {t : at(t) in ball}; empty when the line misses it.
std::optional<std::pair<double, double>> chord(const HorizontalLine& line, const HBall& ball) noexcept;

struct LineSample {
  std::uint64_t seed = 0;
  HBall region;
  std::vector<HorizontalLine> lines;
  double weight = 0.0;  // common weight, lines.size() * weight == 1
};

/// Base points uniform in the ball's bounding box, directions uniform in
/// [0, 2pi), lines missing the ball rejected. Throws DomainError when the
/// rejection rate exceeds 99.9%.
LineSample sample_lines(const HBall& ball, std::size_t count, std::uint64_t seed);

}  // namespace gapbench::heis
