#include "gapbench/geomeasure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "gapbench/errors.hpp"

namespace gapbench::geo {

// ---------------------------------------------------------------------------
// Voxels

namespace {

std::size_t cells(double extent, double step) {
  const double q = extent / step;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(q - 1e-9)));
}

}  // namespace

VoxelGrid VoxelGrid::over(const Box3& box, double h, std::optional<double> hz) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("voxel size must be positive").with("h", h);
  VoxelGrid g;
  g.box = box;
  g.h = h;
  g.hz = hz.value_or(h * h);
  if (!(g.hz > 0.0)) throw DomainError("voxel height must be positive").with("hz", g.hz);
  for (int a = 0; a < 3; ++a)
    if (!(box.hi[a] > box.lo[a])) throw DomainError("voxel box is empty");
  const double nx = std::ceil((box.hi[0] - box.lo[0]) / h - 1e-9);
  const double ny = std::ceil((box.hi[1] - box.lo[1]) / h - 1e-9);
  const double nz = std::ceil((box.hi[2] - box.lo[2]) / g.hz - 1e-9);
  if (nx * ny * nz > static_cast<double>(kMaxVoxels))
    throw DomainError("voxel grid exceeds 2^27 cells").with("cells", nx * ny * nz);
  g.nx = cells(box.hi[0] - box.lo[0], h);
  g.ny = cells(box.hi[1] - box.lo[1], h);
  g.nz = cells(box.hi[2] - box.lo[2], g.hz);
  return g;
}

HPoint VoxelGrid::center(std::size_t i, std::size_t j, std::size_t k) const noexcept {
  return {box.lo[0] + (static_cast<double>(i) + 0.5) * h, box.lo[1] + (static_cast<double>(j) + 0.5) * h,
          box.lo[2] + (static_cast<double>(k) + 0.5) * hz};
}

HPoint VoxelGrid::center(std::size_t idx) const noexcept {
  const std::size_t k = idx % nz;
  const std::size_t j = (idx / nz) % ny;
  const std::size_t i = idx / (nz * ny);
  return center(i, j, k);
}

std::optional<std::size_t> VoxelGrid::locate(const HPoint& p) const noexcept {
  const double fx = std::floor((p.x - box.lo[0]) / h);
  const double fy = std::floor((p.y - box.lo[1]) / h);
  const double fz = std::floor((p.z - box.lo[2]) / hz);
  if (!(fx >= 0.0 && fy >= 0.0 && fz >= 0.0)) return std::nullopt;
  if (fx >= static_cast<double>(nx) || fy >= static_cast<double>(ny) || fz >= static_cast<double>(nz))
    return std::nullopt;
  return index(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy), static_cast<std::size_t>(fz));
}

VoxelSet::VoxelSet(VoxelGrid grid) : grid_(grid), bits_((grid.size() + 63) / 64, 0) {}

void VoxelSet::set(std::size_t idx, bool on) noexcept {
  const std::uint64_t m = std::uint64_t{1} << (idx & 63);
  if (on)
    bits_[idx >> 6] |= m;
  else
    bits_[idx >> 6] &= ~m;
}

bool VoxelSet::contains(const HPoint& p) const noexcept {
  const auto idx = grid_.locate(p);
  return idx && test(*idx);
}

std::size_t VoxelSet::count() const noexcept {
  std::size_t c = 0;
  for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

VoxelSet VoxelSet::complement() const {
  VoxelSet out = *this;
  for (auto& w : out.bits_) w = ~w;
  const std::size_t tail = grid_.size() & 63;
  if (tail != 0 && !out.bits_.empty()) out.bits_.back() &= (std::uint64_t{1} << tail) - 1;
  return out;
}

bool operator==(const VoxelSet& a, const VoxelSet& b) {
  const auto& g = a.grid_;
  const auto& h = b.grid_;
  return g.nx == h.nx && g.ny == h.ny && g.nz == h.nz && g.h == h.h && g.hz == h.hz && g.box.lo == h.box.lo &&
         g.box.hi == h.box.hi && a.bits_ == b.bits_;
}

namespace {

constexpr char kMagic[4] = {'G', 'B', 'V', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("voxel file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void VoxelSet::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open voxel file for writing: " + path);
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, grid_.nx);
  put<std::uint64_t>(os, grid_.ny);
  put<std::uint64_t>(os, grid_.nz);
  for (int a = 0; a < 3; ++a) put<double>(os, grid_.box.lo[a]);
  for (int a = 0; a < 3; ++a) put<double>(os, grid_.box.hi[a]);
  put<double>(os, grid_.h);
  put<double>(os, grid_.hz);
  for (auto w : bits_) put<std::uint64_t>(os, w);
  if (!os) throw IoError("failed writing voxel file: " + path);
}

VoxelSet VoxelSet::read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open voxel file: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a voxel file: " + path);
  if (get<std::uint32_t>(is) != kVersion) throw IoError("unsupported voxel file version");
  VoxelGrid g;
  g.nx = get<std::uint64_t>(is);
  g.ny = get<std::uint64_t>(is);
  g.nz = get<std::uint64_t>(is);
  for (int a = 0; a < 3; ++a) g.box.lo[a] = get<double>(is);
  for (int a = 0; a < 3; ++a) g.box.hi[a] = get<double>(is);
  g.h = get<double>(is);
  g.hz = get<double>(is);
  if (g.nx == 0 || g.ny == 0 || g.nz == 0 || static_cast<double>(g.nx) * g.ny * g.nz > kMaxVoxels)
    throw IoError("voxel file has invalid dimensions");
  VoxelSet s(g);
  for (auto& w : s.bits_) w = get<std::uint64_t>(is);
  return s;
}

VoxelSet voxelize(const Predicate& pred, const Box3& box, double h, std::optional<double> hz) {
  VoxelSet s(VoxelGrid::over(box, h, hz));
  const auto& g = s.grid();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t k = 0; k < g.nz; ++k, ++idx)
        if (pred(g.center(i, j, k))) s.set(idx, true);
  return s;
}

VoxelGrid ball_grid(const HBall& ball, double h) { return VoxelGrid::over(heis::bounding_box(ball), h); }

// ---------------------------------------------------------------------------
// Traces

double LineTrace::covered() const noexcept {
  double s = 0.0;
  for (const auto& iv : intervals) s += iv.length();
  return s;
}

LineTrace LineTrace::complement() const {
  LineTrace out{t0, t1, {}};
  double cur = t0;
  for (const auto& iv : intervals) {
    if (iv.a > cur) out.intervals.push_back({cur, iv.a});
    cur = iv.b;
  }
  if (cur < t1) out.intervals.push_back({cur, t1});
  return out;
}

namespace {

// Merges neighbours separated by interior gaps shorter than `min_gap`.
void close_gaps(std::vector<Interval>& iv, double min_gap) {
  if (iv.empty()) return;
  std::vector<Interval> out{iv.front()};
  for (std::size_t i = 1; i < iv.size(); ++i) {
    if (iv[i].a - out.back().b < min_gap)
      out.back().b = iv[i].b;
    else
      out.push_back(iv[i]);
  }
  iv = std::move(out);
}

}  // namespace

namespace {

// No voxel in the 3x3x3 block around idx has the other membership.
bool deep(const VoxelSet& e, std::size_t idx) {
  const auto& g = e.grid();
  const bool in = e.test(idx);
  const auto i = static_cast<std::ptrdiff_t>(idx / (g.ny * g.nz));
  const auto j = static_cast<std::ptrdiff_t>(idx / g.nz % g.ny);
  const auto k = static_cast<std::ptrdiff_t>(idx % g.nz);
  for (std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i - 1); a <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.nx) - 1, i + 1); ++a)
    for (std::ptrdiff_t b = std::max<std::ptrdiff_t>(0, j - 1); b <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.ny) - 1, j + 1); ++b)
      for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, k - 1); c <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.nz) - 1, k + 1); ++c)
        if (e.test(g.index(a, b, c)) != in) return false;
  return true;
}

struct Run {
  std::size_t lo, hi;  // sample range [lo, hi)
  bool in;
  bool deep;
};

}  // namespace

LineTrace restrict_to_line(const VoxelSet& e, const HorizontalLine& line, const HBall& ball) {
  const auto ch = heis::chord(line, ball);
  if (!ch) throw DomainError("line does not meet the ball");
  LineTrace tr{ch->first, ch->second, {}};
  const double h = e.grid().h;
  const double len = tr.t1 - tr.t0;
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / (0.5 * h))));
  const double dt = len / static_cast<double>(n);
  auto edge = [&](std::size_t i) { return i == n ? tr.t1 : tr.t0 + static_cast<double>(i) * dt; };

  std::vector<std::optional<std::size_t>> vox(n);
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    vox[i] = e.grid().locate(line.at(tr.t0 + (static_cast<double>(i) + 0.5) * dt));
    const bool in = vox[i] && e.test(*vox[i]);
    if (runs.empty() || runs.back().in != in)
      runs.push_back({i, i + 1, in, false});
    else
      runs.back().hi = i + 1;
  }
  // Interior runs made only of boundary-skin voxels are staircase artifacts
  // of the voxelization: flip them, shortest first.
  for (auto& r : runs)
    for (std::size_t i = r.lo; i < r.hi && !r.deep; ++i) r.deep = !vox[i] || deep(e, *vox[i]);
  for (;;) {
    std::size_t pick = 0;
    for (std::size_t r = 1; r + 1 < runs.size(); ++r)
      if (!runs[r].deep && (pick == 0 || runs[r].hi - runs[r].lo < runs[pick].hi - runs[pick].lo)) pick = r;
    if (pick == 0) break;
    runs[pick - 1].hi = runs[pick + 1].hi;
    runs[pick - 1].deep = runs[pick - 1].deep || runs[pick + 1].deep;
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(pick), runs.begin() + static_cast<std::ptrdiff_t>(pick) + 2);
  }
  for (const auto& r : runs)
    if (r.in) tr.intervals.push_back({edge(r.lo), edge(r.hi)});

  close_gaps(tr.intervals, h);
  // Interior islands shorter than h are gaps of the complement.
  std::erase_if(tr.intervals, [&](const Interval& iv) { return iv.a > tr.t0 && iv.b < tr.t1 && iv.length() < h; });
  close_gaps(tr.intervals, h);
  return tr;
}

double nc(const LineTrace& trace) {
  const auto& iv = trace.intervals;
  if (iv.empty()) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  double cur = 0.0;
  for (std::size_t i = 0; i < iv.size(); ++i) {
    const double len = iv[i].length();
    cur = (i == 0) ? len : std::max(len, cur - (iv[i].a - iv[i - 1].b) + len);
    best = std::max(best, cur);
  }
  return kLineSpeed * std::max(0.0, trace.covered() - std::max(0.0, best));
}

double nm_line(const LineTrace& trace) { return nc(trace) + nc(trace.complement()); }

double nm_line(const VoxelSet& e, const HorizontalLine& line, const HBall& ball) {
  return nm_line(restrict_to_line(e, line, ball));
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers over contiguous blocks.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1U, std::min<unsigned>(threads, 64));
  if (threads == 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

MonteCarlo summarize(const std::vector<double>& v) {
  MonteCarlo mc;
  mc.samples = v.size();
  if (v.empty()) return mc;
  double s = 0.0;
  for (double x : v) s += x;
  mc.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - mc.mean) * (x - mc.mean);
    mc.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return mc;
}

}  // namespace

MonteCarlo nm_ball(const VoxelSet& e, const HBall& ball, const LineSample& sample, unsigned threads) {
  if (sample.lines.empty()) throw DomainError("line sample is empty");
  std::vector<double> vals(sample.lines.size());
  parallel_for(vals.size(), threads,
               [&](std::size_t i) { vals[i] = nm_line(e, sample.lines[i], ball) / ball.radius; });
  return summarize(vals);
}

// ---------------------------------------------------------------------------
// Perimeter

std::size_t class_count(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)").with("delta", delta);
  return static_cast<std::size_t>(std::ceil(1.0 / delta)) + 2;
}

std::size_t length_class(double rho_length, double radius, double delta, std::size_t classes) {
  const double q = rho_length / (2.0 * radius);
  if (q >= 1.0) return 0;
  if (!(q > 0.0)) return classes - 1;
  const double l = std::log(q) / std::log(delta);
  auto j = static_cast<std::size_t>(std::floor(l));
  // Guard the boundary against rounding in the logarithms.
  if (j > 0 && q > std::pow(delta, static_cast<double>(j))) --j;
  if (q <= std::pow(delta, static_cast<double>(j + 1))) ++j;
  return std::min(j, classes - 1);
}

namespace {

struct Endpoint {
  HPoint p;
  std::size_t cls;
};

// Interior endpoints of E and of its complement on one line, tagged by class.
// Each interior point appears once for E and once for the complement.
void collect_endpoints(const LineTrace& tr, const HorizontalLine& line, double radius, double delta,
                       std::size_t classes, std::vector<Endpoint>& out, std::size_t& interior) {
  auto add = [&](const LineTrace& t) {
    for (const auto& iv : t.intervals) {
      const std::size_t cls = length_class(kLineSpeed * iv.length(), radius, delta, classes);
      if (iv.a > t.t0) out.push_back({line.at(iv.a), cls});
      if (iv.b < t.t1) out.push_back({line.at(iv.b), cls});
    }
  };
  const std::size_t before = out.size();
  add(tr);
  interior = out.size() - before;
  add(tr.complement());
}

}  // namespace

PerimeterReport perimeter_kinematic(const VoxelSet& e, const HBall& region, const LineSample& sample,
                                    double delta, double gamma, unsigned threads) {
  if (sample.lines.empty()) throw DomainError("line sample is empty");
  const std::size_t classes = class_count(delta);
  const std::size_t m = sample.lines.size();
  std::vector<double> counts(m);
  std::vector<std::size_t> per_line_class(m * classes, 0);
  parallel_for(m, threads, [&](std::size_t i) {
    const auto& line = sample.lines[i];
    const auto tr = restrict_to_line(e, line, region);
    std::vector<Endpoint> pts;
    std::size_t interior = 0;
    collect_endpoints(tr, line, region.radius, delta, classes, pts, interior);
    counts[i] = static_cast<double>(interior);
    for (const auto& ep : pts) ++per_line_class[i * classes + ep.cls];
  });
  PerimeterReport rep;
  rep.scales.delta = delta;
  rep.scales.weights.assign(classes, 0.0);
  const auto mc = summarize(counts);
  rep.per = gamma * mc.mean;
  rep.std_error = gamma * mc.std_error;
  std::vector<std::size_t> per_class(classes, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < classes; ++j) per_class[j] += per_line_class[i * classes + j];
  const double norm = gamma / (2.0 * static_cast<double>(m));
  for (std::size_t j = 0; j < classes; ++j) rep.scales.weights[j] = norm * static_cast<double>(per_class[j]);
  return rep;
}

// ---------------------------------------------------------------------------
// Cut measures

double CutMeasure::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double CutMeasure::distance(const HPoint& p, const HPoint& q) const {
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.set.contains(p) != a.set.contains(q)) s += a.weight;
  return s;
}

std::vector<double> uniform_thresholds(double lo, double hi, std::size_t steps) {
  if (steps == 0 || !(hi > lo)) throw DomainError("thresholds need hi > lo and at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
  return t;
}

CutMeasure cut_measure_of_map(const VectorMap& f, std::size_t dims, const VoxelGrid& grid,
                              const std::vector<std::vector<double>>& thresholds) {
  if (thresholds.size() != dims) throw StructuralError("one threshold list per coordinate is required");
  for (const auto& t : thresholds) {
    if (t.size() < 2) throw DomainError("threshold list needs at least two values");
    for (std::size_t k = 1; k < t.size(); ++k)
      if (!(t[k] > t[k - 1])) throw DomainError("thresholds must be strictly increasing");
  }
  const std::size_t n = grid.size();
  std::vector<double> values(n * dims);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto v = f(grid.center(idx));
    if (v.size() != dims) throw StructuralError("map returned the wrong number of coordinates");
    std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(idx * dims));
  }
  CutMeasure cm;
  for (std::size_t i = 0; i < dims; ++i) {
    const auto& t = thresholds[i];
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      VoxelSet s(grid);
      for (std::size_t idx = 0; idx < n; ++idx)
        if (values[idx * dims + i] > t[k]) s.set(idx, true);
      const std::size_t c = s.count();
      if (c == 0 || c == n) continue;
      cm.atoms.push_back({std::move(s), t[k + 1] - t[k], "f" + std::to_string(i) + ">" + std::to_string(t[k])});
    }
  }
  return cm;
}

SplitResult split_cut_measure(const CutMeasure& cm, double theta, const HBall& ball, const LineSample& sample,
                              double gamma) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive").with("theta", theta);
  SplitResult out;
  out.threshold = theta * heis::ball_volume(ball.radius);
  for (const auto& atom : cm.atoms) {
    const double per = perimeter_kinematic(atom.set, ball, sample, 0.25, gamma).per;
    out.perimeters.push_back(per);
    out.total_perimeter += atom.weight * per;
    (per > out.threshold ? out.d_theta : out.remainder).atoms.push_back(atom);
  }
  out.markov_bound = out.total_perimeter / out.threshold;
  return out;
}

BallMeasure measure_in_ball(const VoxelSet& e, const HBall& ball) {
  const auto& g = e.grid();
  const Box3 bb = heis::bounding_box(ball);
  BallMeasure m;
  std::size_t in = 0, out = 0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const HPoint c0 = g.center(i, j, 0);
      if (c0.x < bb.lo[0] || c0.x > bb.hi[0] || c0.y < bb.lo[1] || c0.y > bb.hi[1]) continue;
      for (std::size_t k = 0; k < g.nz; ++k) {
        const HPoint c = g.center(i, j, k);
        if (!heis::contains(ball, c)) continue;
        (e.test(g.index(i, j, k)) ? in : out) += 1;
      }
    }
  m.inside = static_cast<double>(in) * g.voxel_volume();
  m.outside = static_cast<double>(out) * g.voxel_volume();
  return m;
}

double isoperimetric_ratio(const VoxelSet& e, const HBall& ball, const LineSample& sample, double gamma) {
  const auto m = measure_in_ball(e, ball);
  if (m.inside == 0.0 || m.outside == 0.0) return 0.0;
  const double per = perimeter_kinematic(e, ball, sample, 0.25, gamma).per;
  if (!(per > 0.0))
    throw DomainError("set has zero perimeter at this resolution")
        .with("inside", m.inside)
        .with("outside", m.outside);
  const double r4 = std::pow(ball.radius, 4);
  return m.inside * m.outside / (r4 * std::pow(per, 4.0 / 3.0));
}

namespace {

// Points q with rho(e, q) <= reach on a lattice (k dx, l dx, m dz); spacing
// grows until at most `cap` points remain.
std::vector<HPoint> net_points(double reach, double s, std::size_t cap) {
  if (reach <= 0.0) return {heis::kIdentity};
  double kappa = 0.5;
  while (true) {
    const double dx = kappa * s;
    const double dz = kappa * kappa * s * s;
    const auto mx = static_cast<long>(std::floor(reach / std::sqrt(2.0) / dx));
    const auto mz = static_cast<long>(std::floor(reach * reach / dz));
    const double est = std::pow(2.0 * mx + 1.0, 2) * (2.0 * mz + 1.0);
    if (est <= 8.0 * static_cast<double>(cap)) {
      std::vector<HPoint> pts;
      for (long a = -mx; a <= mx; ++a)
        for (long b = -mx; b <= mx; ++b)
          for (long c = -mz; c <= mz; ++c) {
            const HPoint q{a * dx, b * dx, c * dz};
            if (heis::rho(heis::kIdentity, q) <= reach) pts.push_back(q);
          }
      if (pts.size() <= cap) return pts;
    }
    kappa *= 1.25;
  }
}

}  // namespace

ScaleSelection select_scale(const CutMeasure& cm, const HBall& ball, const LineSample& sample, double delta,
                            const ScaleConstants& consts, double gamma) {
  const std::size_t classes = class_count(delta);
  ScaleSelection sel;
  sel.decomposition.delta = delta;
  sel.decomposition.weights.assign(classes, 0.0);
  sel.y = ball.center;
  if (sample.lines.empty()) throw DomainError("line sample is empty");

  struct Weighted {
    HPoint p;
    std::size_t cls;
    double w;
  };
  std::vector<Weighted> all;
  std::vector<Endpoint> pts;
  const double line_w = gamma / (2.0 * static_cast<double>(sample.lines.size()));
  for (const auto& atom : cm.atoms) {
    for (const auto& line : sample.lines) {
      const auto tr = restrict_to_line(atom.set, line, ball);
      pts.clear();
      std::size_t interior = 0;
      collect_endpoints(tr, line, ball.radius, delta, classes, pts, interior);
      for (const auto& ep : pts) {
        all.push_back({ep.p, ep.cls, atom.weight * line_w});
        sel.decomposition.weights[ep.cls] += atom.weight * line_w;
      }
    }
  }
  for (double w : sel.decomposition.weights) sel.total += w;
  if (sel.total == 0.0) {
    sel.j = 0;
    sel.decomposition.selected_j = 0;
    sel.decomposition.selected_y = ball.center;
    return sel;
  }

  auto fail = [&](const std::string& what) {
    DomainError err(what);
    for (std::size_t j = 0; j < classes; ++j) err.with("w_" + std::to_string(j), sel.decomposition.weights[j]);
    err.with("total", sel.total);
    return err;
  };

  const auto jmax = static_cast<std::size_t>(std::ceil(1.0 / delta));
  sel.class_budget = consts.c1 * delta * sel.total;
  std::optional<std::size_t> pick;
  for (std::size_t j = 0; j <= jmax && j < classes; ++j)
    if (sel.decomposition.weights[j] <= sel.class_budget) {
      pick = j;
      break;
    }
  if (!pick) throw fail("no admissible scale class");
  sel.j = *pick;

  const double s = std::pow(delta, static_cast<double>(sel.j)) * ball.radius;
  sel.local_budget = consts.c2 * std::pow(delta, 4.0 * static_cast<double>(sel.j) + 1.0) * sel.total;
  const auto net = net_points(ball.radius - s, s, consts.max_candidates);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : net) {
    const HPoint y = heis::rho_mul(ball.center, q);
    const HBall small{y, s};
    double w = 0.0;
    for (const auto& ep : all)
      if (ep.cls == sel.j && heis::contains(small, ep.p)) w += ep.w;
    sel.candidates.push_back({y, w});
    if (w < best) {
      best = w;
      sel.y = y;
    }
  }
  sel.local_weight = best;
  if (best > sel.local_budget) throw fail("no net point meets the local budget");
  sel.decomposition.selected_j = sel.j;
  sel.decomposition.selected_y = sel.y;
  return sel;
}

// ---------------------------------------------------------------------------
// Half-spaces

HPoint normalize(const HBall& ball, const HPoint& p) {
  return heis::h_dilate(1.0 / ball.radius, heis::rho_mul(heis::h_inv(ball.center), p));
}

HPoint denormalize(const HBall& ball, const HPoint& q) {
  return heis::rho_mul(ball.center, heis::h_dilate(ball.radius, q));
}

namespace {

struct Sweep {
  double symdiff;  // count
  double offset;
};

// Best offset for {s >= c} against labels, by sorting.
Sweep best_offset(std::vector<std::pair<double, bool>>& pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t total_in = 0;
  for (const auto& pt : pts) total_in += pt.second ? 1 : 0;
  // Cut before index k: prefix is outside P, suffix inside.
  std::size_t in_prefix = 0, out_suffix = pts.size() - total_in;
  Sweep best{static_cast<double>(in_prefix + out_suffix), pts.empty() ? 0.0 : pts.front().first - 1.0};
  for (std::size_t k = 1; k <= pts.size(); ++k) {
    if (pts[k - 1].second)
      ++in_prefix;
    else
      --out_suffix;
    if (k < pts.size() && pts[k].first == pts[k - 1].first) continue;
    const double cost = static_cast<double>(in_prefix + out_suffix);
    if (cost < best.symdiff) {
      best.symdiff = cost;
      best.offset = k < pts.size() ? 0.5 * (pts[k - 1].first + pts[k].first) : pts.back().first + 1.0;
    }
  }
  return best;
}

std::array<double, 3> direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

}  // namespace

HalfSpaceFit fit_halfspace(const VoxelSet& e, const HBall& ball) {
  const auto& g = e.grid();
  struct Labeled {
    HPoint q;
    bool in;
  };
  std::vector<Labeled> pts;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const HPoint c = g.center(idx);
    if (!heis::contains(ball, c)) continue;
    pts.push_back({normalize(ball, c), e.test(idx)});
  }
  if (pts.empty()) throw DomainError("ball contains no voxel centers");

  constexpr std::size_t kSearchPoints = 30000;
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / kSearchPoints);
  std::vector<std::pair<double, bool>> proj;
  auto evaluate = [&](const std::array<double, 3>& nrm, std::size_t step) {
    proj.clear();
    for (std::size_t i = 0; i < pts.size(); i += step) {
      const auto& p = pts[i];
      proj.emplace_back(nrm[0] * p.q.x + nrm[1] * p.q.y + nrm[2] * p.q.z, p.in);
    }
    return best_offset(proj);
  };

  constexpr int kPhi = 32, kTheta = 16;
  double best_cost = std::numeric_limits<double>::infinity();
  double bt = 0.0, bp = 0.0;
  for (int it = 0; it < kTheta; ++it)
    for (int ip = 0; ip < kPhi; ++ip) {
      const double th = (it + 0.5) * M_PI / kTheta;
      const double ph = ip * 2.0 * M_PI / kPhi;
      const double c = evaluate(direction(th, ph), stride).symdiff;
      if (c < best_cost) {
        best_cost = c;
        bt = th;
        bp = ph;
      }
    }
  double dth = M_PI / kTheta, dph = 2.0 * M_PI / kPhi;
  for (int level = 0; level < 2; ++level) {
    dth /= 4.0;
    dph /= 4.0;
    const double ct = bt, cp = bp;
    for (int a = -4; a <= 4; ++a)
      for (int b = -4; b <= 4; ++b) {
        const double th = std::clamp(ct + a * dth, 0.0, M_PI);
        const double ph = cp + b * dph;
        const double c = evaluate(direction(th, ph), stride).symdiff;
        if (c < best_cost) {
          best_cost = c;
          bt = th;
          bp = ph;
        }
      }
  }
  HalfSpaceFit fit;
  fit.plane.normal = direction(bt, bp);
  const auto full = evaluate(fit.plane.normal, 1);
  fit.plane.offset = full.offset;
  fit.symdiff = full.symdiff / static_cast<double>(pts.size());
  return fit;
}

// ---------------------------------------------------------------------------
// Collapse

const char* to_string(CollapseStrategy s) noexcept {
  return s == CollapseStrategy::GridScan ? "grid-scan" : "segment-partition";
}

std::vector<HPoint> central_samples(const HBall& ball, std::size_t columns, std::size_t per_column) {
  if (columns == 0 || per_column < 2) throw DomainError("central samples need columns >= 1 and per_column >= 2");
  std::vector<HPoint> out;
  const double lim = 1.0 / std::sqrt(2.0);
  for (std::size_t a = 0; a < columns; ++a)
    for (std::size_t b = 0; b < columns; ++b) {
      const double u = columns == 1 ? 0.0 : -lim + 2.0 * lim * (static_cast<double>(a) + 0.5) / columns;
      const double v = columns == 1 ? 0.0 : -lim + 2.0 * lim * (static_cast<double>(b) + 0.5) / columns;
      const double room = 1.0 - 2.0 * (u * u + v * v);
      if (room <= 0.0) continue;
      const double zmax = 0.98 * std::sqrt(room);
      for (std::size_t k = 0; k < per_column; ++k) {
        const double t = -zmax + 2.0 * zmax * static_cast<double>(k) / static_cast<double>(per_column - 1);
        out.push_back(denormalize(ball, {u, v, t}));
      }
    }
  return out;
}

namespace {

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

double validate_lipschitz(const LipschitzMap& f, const std::vector<HPoint>& samples, double tol) {
  std::vector<std::vector<double>> vals;
  vals.reserve(samples.size());
  for (const auto& p : samples) vals.push_back(f.f(p));
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = heis::rho(samples[i], samples[j]);
      if (d <= 0.0) continue;
      const double ratio = l1(vals[i], vals[j]) / d;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + tol)
        throw PreconditionError("map is not 1-Lipschitz on the samples")
            .with("i", static_cast<double>(i))
            .with("j", static_cast<double>(j))
            .with("ratio", ratio);
    }
  return worst;
}

std::size_t segment_blocks(double epsilon, double radius, const ExperimentConfig& cfg) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive").with("epsilon", epsilon);
  auto n = static_cast<std::size_t>(
      std::max(static_cast<double>(cfg.n_min), std::round(std::pow(epsilon, -cfg.exp_n))));
  const double height = cfg.h_u * radius * radius;
  while (n > 0 && std::sqrt(height / static_cast<double>(2 * n + 1)) < epsilon) --n;
  return n;
}

CollapseReport collapse_search(const LipschitzMap& f, const std::vector<HPoint>& samples, const HBall& ball,
                               double epsilon, CollapseStrategy strategy, const ExperimentConfig& cfg) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive").with("epsilon", epsilon);
  if (samples.empty()) throw DomainError("collapse search needs samples");
  validate_lipschitz(f, samples);

  CollapseReport rep;
  rep.epsilon = epsilon;
  rep.strategy = strategy;
  rep.ratio = std::numeric_limits<double>::infinity();
  auto consider = [&](const HPoint& p, const HPoint& q, const std::vector<double>& fp, const std::vector<double>& fq) {
    const double r = heis::rho(p, q);
    if (r < epsilon) return;
    ++rep.pairs_scanned;
    const double ratio = l1(fp, fq) / r;
    if (ratio < rep.ratio) {
      rep.ratio = ratio;
      rep.p = p;
      rep.q = q;
      rep.r = r;
    }
  };

  if (strategy == CollapseStrategy::GridScan) {
    std::map<std::pair<double, double>, std::vector<std::size_t>> columns;
    for (std::size_t i = 0; i < samples.size(); ++i) columns[{samples[i].x, samples[i].y}].push_back(i);
    std::vector<std::vector<double>> vals;
    vals.reserve(samples.size());
    for (const auto& p : samples) vals.push_back(f.f(p));
    for (const auto& [key, idx] : columns)
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
          consider(samples[idx[a]], samples[idx[b]], vals[idx[a]], vals[idx[b]]);
  } else {
    const std::size_t n = segment_blocks(epsilon, ball.radius, cfg);
    rep.blocks = 2 * n + 1;
    const HPoint u = heis::h_dilate(ball.radius, {0.0, 0.0, cfg.h_u});
    // Neighbourhood of the center: the nearest samples within r/4.
    std::vector<std::pair<double, HPoint>> near;
    for (const auto& p : samples) {
      const double d = heis::rho(ball.center, p);
      if (d <= 0.25 * ball.radius) near.emplace_back(d, p);
    }
    std::stable_sort(near.begin(), near.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (near.size() > 16) near.resize(16);
    if (near.empty()) near.emplace_back(0.0, ball.center);
    const HPoint cu = heis::rho_mul(ball.center, u);
    const double blocks = static_cast<double>(2 * n + 1);
    for (const auto& [dp, p] : near)
      for (const auto& [dq, q0] : near) {
        const HPoint q = heis::rho_mul(cu, heis::rho_mul(heis::h_inv(ball.center), q0));
        for (std::size_t i = 0; i <= n; ++i) {
          const double s0 = 2.0 * static_cast<double>(i) / blocks;
          const double s1 = (2.0 * static_cast<double>(i) + 1.0) / blocks;
          const HPoint a{p.x + s0 * (q.x - p.x), p.y + s0 * (q.y - p.y), p.z + s0 * (q.z - p.z)};
          const HPoint b{p.x + s1 * (q.x - p.x), p.y + s1 * (q.y - p.y), p.z + s1 * (q.z - p.z)};
          const HPoint w{a.x, a.y, b.z};
          if (!heis::contains(ball, a) || !heis::contains(ball, w)) continue;
          consider(a, w, f.f(a), f.f(w));
        }
      }
  }
  if (!std::isfinite(rep.ratio))
    throw DomainError("no central pair at distance >= epsilon").with("epsilon", epsilon);
  return rep;
}

LipschitzMap horizontal_projection_map() {
  return {"xy", 2, [](const HPoint& p) { return std::vector<double>{p.x, p.y}; }};
}

LipschitzMap first_coordinate_map() {
  return {"x", 1, [](const HPoint& p) { return std::vector<double>{p.x}; }};
}

LipschitzMap anchor_distance_map(const std::vector<HPoint>& anchors) {
  if (anchors.empty()) throw DomainError("anchor map needs at least one anchor");
  const double m = static_cast<double>(anchors.size());
  return {"anchors", anchors.size(), [anchors, m](const HPoint& p) {
            std::vector<double> v;
            v.reserve(anchors.size());
            for (const auto& a : anchors) v.push_back(heis::rho(p, a) / m);
            return v;
          }};
}

}  // namespace gapbench::geo
