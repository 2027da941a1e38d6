#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gapbench/heisenberg.hpp"

namespace gapbench::geo {

using heis::Box3;
using heis::HBall;
using heis::HorizontalLine;
using heis::HPoint;
using heis::LineSample;

inline constexpr std::size_t kMaxVoxels = std::size_t{1} << 27;

/// Regular grid over a box; voxels are h x h x hz (hz = h^2 by default, so
/// the grid dilates with the group).
struct VoxelGrid {
  Box3 box;
  double h = 0.0;
  double hz = 0.0;
  std::size_t nx = 0, ny = 0, nz = 0;

  static VoxelGrid over(const Box3& box, double h, std::optional<double> hz = std::nullopt);

  std::size_t size() const noexcept { return nx * ny * nz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept { return (i * ny + j) * nz + k; }
  HPoint center(std::size_t i, std::size_t j, std::size_t k) const noexcept;
  HPoint center(std::size_t idx) const noexcept;
  /// Voxel containing p, or empty outside the box.
  std::optional<std::size_t> locate(const HPoint& p) const noexcept;
  double voxel_volume() const noexcept { return h * h * hz; }
};

using Predicate = std::function<bool(const HPoint&)>;

class VoxelSet {
 public:
  VoxelSet() = default;
  explicit VoxelSet(VoxelGrid grid);

  const VoxelGrid& grid() const noexcept { return grid_; }
  bool test(std::size_t idx) const noexcept { return (bits_[idx >> 6] >> (idx & 63)) & 1U; }
  void set(std::size_t idx, bool on) noexcept;
  /// False outside the box.
  bool contains(const HPoint& p) const noexcept;
  std::size_t count() const noexcept;
  double measure() const noexcept { return static_cast<double>(count()) * grid_.voxel_volume(); }
  const std::vector<std::uint64_t>& words() const noexcept { return bits_; }

  VoxelSet complement() const;
  friend bool operator==(const VoxelSet& a, const VoxelSet& b);

  /// Little-endian binary file: magic "GBVX", version, dims, box, h, hz, bits.
  void write(const std::string& path) const;
  static VoxelSet read(const std::string& path);

 private:
  VoxelGrid grid_;
  std::vector<std::uint64_t> bits_;
};

/// Occupied iff the predicate holds at the voxel center. Throws DomainError
/// when the grid exceeds kMaxVoxels.
VoxelSet voxelize(const Predicate& pred, const Box3& box, double h, std::optional<double> hz = std::nullopt);

/// Grid covering the bounding box of a ball.
VoxelGrid ball_grid(const HBall& ball, double h);

// ---------------------------------------------------------------------------
// Line traces

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const noexcept { return b - a; }
};

/// Parameter intervals of E along a line, clipped to the ball's chord [t0, t1].
struct LineTrace {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Interval> intervals;

  LineTrace complement() const;
  double covered() const noexcept;
};

/// Samples the chord at step h/2 (h of E's grid) and merges runs. Interior
/// runs with no voxel outside the one-voxel boundary skin of E are flipped,
/// then interior gaps of E and of its complement shorter than h are closed. Throws
/// DomainError if the line misses the ball.
LineTrace restrict_to_line(const VoxelSet& e, const HorizontalLine& line, const HBall& ball);

/// Horizontal lines are rho-rectifiable with rho-length sqrt(2)|dt|.
inline constexpr double kLineSpeed = 1.4142135623730951;

/// min over subintervals I of the rho-length of I (sym. diff.) E, via a
/// maximum-subsegment scan.
double nc(const LineTrace& trace);
double nm_line(const LineTrace& trace);
double nm_line(const VoxelSet& e, const HorizontalLine& line, const HBall& ball);

struct MonteCarlo {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Mean of nm_line / r over the sample with its standard error. Lines are
/// split across `threads` workers; sums run in line order either way.
MonteCarlo nm_ball(const VoxelSet& e, const HBall& ball, const LineSample& sample, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Perimeter and scale decomposition

struct ScaleDecomposition {
  double delta = 0.1;
  std::vector<double> weights;  // w_0 .. w_jmax; the last class absorbs shorter intervals
  std::optional<std::size_t> selected_j;
  std::optional<HPoint> selected_y;
};

struct PerimeterReport {
  double per = 0.0;        // gamma * mean interior endpoint count
  double std_error = 0.0;
  ScaleDecomposition scales;
};

/// Number of length classes for a given delta: ceil(1/delta) + 2.
std::size_t class_count(double delta);
/// Class j with rho-length / r in (2 delta^{j+1}, 2 delta^j], clamped to the last class.
std::size_t length_class(double rho_length, double radius, double delta, std::size_t classes);

PerimeterReport perimeter_kinematic(const VoxelSet& e, const HBall& region, const LineSample& sample,
                                    double delta, double gamma = 1.0, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Cut measures

struct CutAtom {
  VoxelSet set;
  double weight = 0.0;
  std::string label;
};

struct CutMeasure {
  std::vector<CutAtom> atoms;

  double total_weight() const noexcept;
  /// d(p, q) = sum weight |1_E(p) - 1_E(q)|.
  double distance(const HPoint& p, const HPoint& q) const;
};

using VectorMap = std::function<std::vector<double>(const HPoint&)>;

/// Superlevel sets {f_i > t_k} on the grid with weight t_{k+1} - t_k.
/// thresholds[i] must be strictly increasing. Empty and full sets are omitted.
CutMeasure cut_measure_of_map(const VectorMap& f, std::size_t dims, const VoxelGrid& grid,
                              const std::vector<std::vector<double>>& thresholds);

/// Evenly spaced thresholds lo, lo + step, ..., hi.
std::vector<double> uniform_thresholds(double lo, double hi, std::size_t steps);

struct SplitResult {
  CutMeasure d_theta;
  CutMeasure remainder;
  std::vector<double> perimeters;  // per atom of the input, same order
  double total_perimeter = 0.0;     // sum weight * per
  double threshold = 0.0;           // theta * mu(ball)
  double markov_bound = 0.0;        // total_perimeter / threshold
};

SplitResult split_cut_measure(const CutMeasure& cm, double theta, const HBall& ball, const LineSample& sample,
                              double gamma = 1.0);

/// mu(B n E) mu(B \ E) / (r^4 per^{4/3}).
double isoperimetric_ratio(const VoxelSet& e, const HBall& ball, const LineSample& sample, double gamma = 1.0);

struct BallMeasure {
  double inside = 0.0;   // mu(B n E)
  double outside = 0.0;  // mu(B \ E)
};
BallMeasure measure_in_ball(const VoxelSet& e, const HBall& ball);

struct ScaleConstants {
  double c1 = 4.0;
  double c2 = 8.0;
  std::size_t max_candidates = 512;
};

struct ScaleCandidate {
  HPoint y;
  double weight = 0.0;  // w_j(B_{delta^j r}(y))
};

struct ScaleSelection {
  ScaleDecomposition decomposition;  // w_j(B) of the whole measure
  double total = 0.0;
  std::size_t j = 0;
  HPoint y;
  double class_budget = 0.0;  // c1 delta total
  double local_budget = 0.0;  // c2 delta^{4j+1} total
  double local_weight = 0.0;
  std::vector<ScaleCandidate> candidates;
};

/// Smallest admissible j <= ceil(1/delta), then the net point y minimizing
/// w_j(B_{delta^j r}(y)). Throws DomainError with the w_j table when no j or
/// no y meets its budget.
ScaleSelection select_scale(const CutMeasure& cm, const HBall& ball, const LineSample& sample, double delta,
                            const ScaleConstants& consts = {}, double gamma = 1.0);

// ---------------------------------------------------------------------------
// Half-space fitting

/// Ball-normalized coordinates dilate(1/r, center^{-1} p); affine in p, so
/// half-spaces stay half-spaces.
HPoint normalize(const HBall& ball, const HPoint& p);
HPoint denormalize(const HBall& ball, const HPoint& q);

struct HalfSpace {
  std::array<double, 3> normal{0.0, 0.0, 1.0};  // unit, in ball-normalized coordinates
  double offset = 0.0;                           // {p : normal . p >= offset}
  bool contains(const HPoint& p) const noexcept {
    return normal[0] * p.x + normal[1] * p.y + normal[2] * p.z >= offset;
  }
};

struct HalfSpaceFit {
  HalfSpace plane;
  double symdiff = 0.0;  // |(E n B) sym. diff. (P n B)| / |B| over voxels
};

/// Coarse-to-fine search over normals (32 x 16 spherical grid, refined
/// twice); the offset is the exact minimizer of a sorted sweep.
HalfSpaceFit fit_halfspace(const VoxelSet& e, const HBall& ball);

// ---------------------------------------------------------------------------
// Central collapse

struct LipschitzMap {
  std::string name;
  std::size_t dims = 0;
  VectorMap f;
};

enum class CollapseStrategy { GridScan, SegmentPartition };
const char* to_string(CollapseStrategy s) noexcept;

struct ExperimentConfig {
  double a = 1.0 / 3.0;   // stability exponent
  double k = 1.0;         // final bound exponent
  double h_u = 0.16;      // height of u = (0, 0, h_u)
  double exp_n = 1.0 / 45.0;
  double exp_2 = 1.0 / 90.0;
  double exp_3 = 1.0 / 18.0;
  double exp_4 = 1.0 / 216.0;
  double exp_5 = 1.0 / 1080.0;
  double exp_6 = 1.0 / 9.0;
  double gamma = 1.0;
  double delta = 0.1;
  ScaleConstants scale;
  std::size_t n_min = 1;
  std::size_t lines = 4000;
  double h = 0.05;
};

struct CollapseReport {
  double epsilon = 0.0;
  HPoint p, q;
  double r = 0.0;
  double ratio = 0.0;
  CollapseStrategy strategy = CollapseStrategy::GridScan;
  std::size_t pairs_scanned = 0;
  std::size_t blocks = 0;  // 2n + 1 for the segment partition
};

/// Points on central columns: an xy grid of `columns` x `columns` base points in
/// the ball's shadow with `per_column` z values each, all inside the ball.
std::vector<HPoint> central_samples(const HBall& ball, std::size_t columns, std::size_t per_column);

/// Max of |f(p) - f(q)|_1 / rho(p, q) over sample pairs; throws
/// PreconditionError with the pair when it exceeds 1 + tol.
double validate_lipschitz(const LipschitzMap& f, const std::vector<HPoint>& samples, double tol = 1e-9);

CollapseReport collapse_search(const LipschitzMap& f, const std::vector<HPoint>& samples, const HBall& ball,
                               double epsilon, CollapseStrategy strategy, const ExperimentConfig& cfg = {});

/// n for the segment partition: max(n_min, round(eps^{-exp_n})), lowered
/// until vertical block pairs of height h_u r^2 / (2n + 1) have rho >= epsilon.
std::size_t segment_blocks(double epsilon, double radius, const ExperimentConfig& cfg);

// Fixture maps.
LipschitzMap horizontal_projection_map();                      // (x, y)
LipschitzMap anchor_distance_map(const std::vector<HPoint>& anchors);  // (rho(p, a_i) / m)_i
LipschitzMap first_coordinate_map();                           // (x)

}  // namespace gapbench::geo
