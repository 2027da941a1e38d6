#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapbench/geomeasure.hpp"
#include "gapbench/io.hpp"
#include "gapbench/sdp.hpp"

namespace gapbench::app {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Every tunable constant; loaded from --config (unknown keys are rejected).
struct Settings {
  geo::ExperimentConfig experiment;
  sdp::SolverOptions sdp;
};

Settings settings_from_json(const json& j);
json to_json(const Settings& s);

struct RunContext {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Settings settings;
};

/// A command's result: the JSON report body and an optional CSV mirror.
struct Report {
  json body;
  std::string csv;
};

/// "halfspace:a,b,c,o" (ax + by + cz >= o), "slab:lo,hi" (lo < z < hi),
/// "ball:x,y,z,r", "sine:amp,omega,phase,tilt" (z >= amp sin(omega x + phase) + tilt y),
/// "empty", "full".
geo::Predicate parse_set(const std::string& spec);

/// "xy", "x", "anchors[:m]" (m seeded anchors), "grid-embedding".
geo::LipschitzMap parse_map(const std::string& spec, std::uint64_t seed);

/// First cut coordinate of the optimal L1 embedding of rho on the 12 points
/// {(0,0),(1,1),(2,2),(0,2)} x {0,1,2}, divided by c1 and extended to the
/// whole group by the McShane formula min_i (g_i + rho(p, x_i)).
geo::LipschitzMap grid_embedding_map();
std::vector<heis::HPoint> grid_embedding_points();

struct GridArgs {
  int k = 1;
  std::size_t subset = 0;  // 0: full grid
};
Report cmd_grid(const GridArgs& a, const RunContext& ctx);

Report cmd_distortion(const FiniteMetric& d, const RunContext& ctx);
Report cmd_gap_metric(const FiniteMetric& d, const RunContext& ctx);
Report cmd_gap_instance(const sparsest::DemandInstance& inst, const RunContext& ctx);
Report cmd_sdp_solve(const sparsest::DemandInstance& inst, const RunContext& ctx);

struct SparsestArgs {
  std::size_t l1_trials = 100;
};
Report cmd_sparsest(const sparsest::DemandInstance& inst, const SparsestArgs& a, const RunContext& ctx);

struct MonotoneArgs {
  std::string set = "halfspace:1,0,0,0";
  heis::HBall ball{{0.0, 0.0, 0.0}, 1.0};
  bool fit = true;
};
Report cmd_monotone(const MonotoneArgs& a, const RunContext& ctx);

struct CollapseArgs {
  std::string map = "xy";
  std::vector<double> epsilons{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  heis::HBall ball{{0.0, 0.0, 0.0}, 1.0};
  std::size_t columns = 7;
  std::size_t per_column = 33;
};
Report cmd_collapse(const CollapseArgs& a, const RunContext& ctx);

struct ScaleArgs {
  std::string map = "x";
  std::size_t steps = 10;
  heis::HBall ball{{0.0, 0.0, 0.0}, 1.0};
  std::string manifest_dir;  // when set, the cut measure is written there
};
Report cmd_scale_select(const ScaleArgs& a, const RunContext& ctx);

struct OracleArgs {
  double h = 0.1;
  std::size_t levels = 3;  // h, h/2, h/4
};
Report cmd_calibrate_oracle(const OracleArgs& a, const RunContext& ctx);

/// Full command-line entry point (argv[0] included). Reports go to --out or
/// stdout; errors are printed to stderr as JSON. Returns the exit code:
/// 0 ok, 2 structural/domain/precondition, 3 convergence, 4 I/O, 1 internal.
int run_cli(const std::vector<std::string>& argv);

/// Removes manifest.wall_time, the only field allowed to differ between runs.
json strip_timing(json report);

}  // namespace gapbench::app
