#include "gapbench/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"

#include "gapbench/cutcone.hpp"
#include "gapbench/errors.hpp"
#include "gapbench/random.hpp"

namespace gapbench::app {

// ---------------------------------------------------------------------------
// Settings

namespace {

template <class T>
void take(const json& obj, const char* key, T& field, std::vector<std::string>& seen) {
  if (obj.contains(key)) {
    field = obj.at(key).get<T>();
    seen.emplace_back(key);
  }
}

void reject_unknown(const json& obj, const std::vector<std::string>& seen, const std::string& where) {
  for (const auto& [k, v] : obj.items())
    if (std::find(seen.begin(), seen.end(), k) == seen.end())
      throw StructuralError("unknown config key " + where + k);
}

}  // namespace

Settings settings_from_json(const json& j) {
  Settings s;
  try {
    if (!j.is_object()) throw StructuralError("config must be a JSON object");
    std::vector<std::string> top;
    if (j.contains("experiment")) {
      top.emplace_back("experiment");
      const auto& e = j.at("experiment");
      auto& x = s.experiment;
      std::vector<std::string> seen;
      take(e, "a", x.a, seen);
      take(e, "k", x.k, seen);
      take(e, "h_u", x.h_u, seen);
      take(e, "exp_n", x.exp_n, seen);
      take(e, "exp_2", x.exp_2, seen);
      take(e, "exp_3", x.exp_3, seen);
      take(e, "exp_4", x.exp_4, seen);
      take(e, "exp_5", x.exp_5, seen);
      take(e, "exp_6", x.exp_6, seen);
      take(e, "gamma", x.gamma, seen);
      take(e, "delta", x.delta, seen);
      take(e, "n_min", x.n_min, seen);
      take(e, "lines", x.lines, seen);
      take(e, "h", x.h, seen);
      if (e.contains("scale")) {
        seen.emplace_back("scale");
        const auto& c = e.at("scale");
        std::vector<std::string> cs;
        take(c, "c1", x.scale.c1, cs);
        take(c, "c2", x.scale.c2, cs);
        take(c, "max_candidates", x.scale.max_candidates, cs);
        reject_unknown(c, cs, "experiment.scale.");
      }
      reject_unknown(e, seen, "experiment.");
    }
    if (j.contains("sdp")) {
      top.emplace_back("sdp");
      const auto& e = j.at("sdp");
      auto& o = s.sdp;
      std::vector<std::string> seen;
      take(e, "tol", o.tol, seen);
      take(e, "residual_tol", o.residual_tol, seen);
      take(e, "max_iter", o.max_iter, seen);
      take(e, "relaxation", o.relaxation, seen);
      take(e, "sigma", o.sigma, seen);
      take(e, "adapt_every", o.adapt_every, seen);
      take(e, "adapt_ratio", o.adapt_ratio, seen);
      take(e, "anderson_memory", o.anderson_memory, seen);
      reject_unknown(e, seen, "sdp.");
    }
    reject_unknown(j, top, "");
  } catch (const json::exception& e) {
    throw StructuralError(std::string("invalid config: ") + e.what());
  }
  if (!(s.experiment.h > 0.0)) throw DomainError("experiment.h must be positive");
  if (s.experiment.lines == 0) throw DomainError("experiment.lines must be positive");
  return s;
}

json to_json(const Settings& s) {
  const auto& x = s.experiment;
  const auto& o = s.sdp;
  return {{"experiment",
           {{"a", x.a},
            {"k", x.k},
            {"h_u", x.h_u},
            {"exp_n", x.exp_n},
            {"exp_2", x.exp_2},
            {"exp_3", x.exp_3},
            {"exp_4", x.exp_4},
            {"exp_5", x.exp_5},
            {"exp_6", x.exp_6},
            {"gamma", x.gamma},
            {"delta", x.delta},
            {"n_min", x.n_min},
            {"lines", x.lines},
            {"h", x.h},
            {"scale", {{"c1", x.scale.c1}, {"c2", x.scale.c2}, {"max_candidates", x.scale.max_candidates}}}}},
          {"sdp",
           {{"tol", o.tol},
            {"residual_tol", o.residual_tol},
            {"max_iter", o.max_iter},
            {"relaxation", o.relaxation},
            {"sigma", o.sigma},
            {"adapt_every", o.adapt_every},
            {"adapt_ratio", o.adapt_ratio},
            {"anderson_memory", o.anderson_memory}}}};
}

// ---------------------------------------------------------------------------
// Set and map specs

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw StructuralError("not a number: '" + cell + "'");
    }
  }
  return out;
}

std::pair<std::string, std::vector<double>> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, {}};
  return {spec.substr(0, colon), parse_numbers(spec.substr(colon + 1))};
}

void need(const std::string& kind, const std::vector<double>& p, std::size_t count) {
  if (p.size() != count)
    throw StructuralError(kind + " expects " + std::to_string(count) + " parameters, got " +
                          std::to_string(p.size()));
}

}  // namespace

geo::Predicate parse_set(const std::string& spec) {
  const auto [kind, p] = split_spec(spec);
  if (kind == "empty") return [](const heis::HPoint&) { return false; };
  if (kind == "full") return [](const heis::HPoint&) { return true; };
  if (kind == "halfspace") {
    need(kind, p, 4);
    return [p](const heis::HPoint& q) { return p[0] * q.x + p[1] * q.y + p[2] * q.z >= p[3]; };
  }
  if (kind == "slab") {
    need(kind, p, 2);
    return [p](const heis::HPoint& q) { return q.z > p[0] && q.z < p[1]; };
  }
  if (kind == "ball") {
    need(kind, p, 4);
    const auto b = heis::make_ball({p[0], p[1], p[2]}, p[3]);
    return [b](const heis::HPoint& q) { return heis::contains(b, q); };
  }
  if (kind == "sine") {
    need(kind, p, 4);
    return [p](const heis::HPoint& q) { return q.z >= p[0] * std::sin(p[1] * q.x + p[2]) + p[3] * q.y; };
  }
  throw StructuralError("unknown set spec '" + spec + "'");
}

std::vector<heis::HPoint> grid_embedding_points() {
  std::vector<heis::HPoint> pts;
  const double xy[4][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 2}};
  for (const auto& c : xy)
    for (int z = 0; z <= 2; ++z) pts.push_back({c[0], c[1], static_cast<double>(z)});
  return pts;
}

geo::LipschitzMap grid_embedding_map() {
  static const auto data = [] {
    const auto pts = grid_embedding_points();
    const auto gm = heis::metric_on(pts);
    const auto cert = cutcone::c1_exact(gm.metric);
    const auto& atom = cert.embedding.atoms.front();
    std::vector<double> g(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) g[i] = ((atom.mask >> i) & 1U) ? atom.weight / cert.c1 : 0.0;
    return std::make_pair(pts, g);
  }();
  return {"grid-embedding", 1, [](const heis::HPoint& p) {
            double v = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < data.first.size(); ++i)
              v = std::min(v, data.second[i] + heis::rho(p, data.first[i]));
            return std::vector<double>{v};
          }};
}

geo::LipschitzMap parse_map(const std::string& spec, std::uint64_t seed) {
  const auto [kind, p] = split_spec(spec);
  if (kind == "xy") return geo::horizontal_projection_map();
  if (kind == "x") return geo::first_coordinate_map();
  if (kind == "grid-embedding") return grid_embedding_map();
  if (kind == "anchors") {
    std::size_t m = 4;
    if (!p.empty()) {
      need(kind, p, 1);
      if (!(p[0] >= 1.0 && p[0] <= 64.0)) throw DomainError("anchor count must lie in [1, 64]");
      m = static_cast<std::size_t>(p[0]);
    }
    Rng rng(seed);
    std::vector<heis::HPoint> anchors;
    for (std::size_t i = 0; i < m; ++i) anchors.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    return geo::anchor_distance_map(anchors);
  }
  throw StructuralError("unknown map spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Commands

namespace {

json residual_flags(const cutcone::CertificateResiduals& r) {
  return {{"phi_star_is_one", r.phi_star_error <= 1e-6},
          {"ratio_is_inverse_c1", r.ratio_error <= 1e-6},
          {"cut_inequality_holds", r.cut_inequality <= 1e-6}};
}

json point_list(const std::vector<heis::HPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(io::to_json(p));
  return out;
}

json members(cutcone::CutMask s, std::size_t n) {
  json out = json::array();
  for (std::size_t i = 0; i < n; ++i)
    if ((s >> i) & 1U) out.push_back(i);
  return out;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

heis::LineSample lines_for(const heis::HBall& ball, const RunContext& ctx) {
  return heis::sample_lines(ball, ctx.settings.experiment.lines, ctx.seed);
}

}  // namespace

Report cmd_grid(const GridArgs& a, const RunContext& ctx) {
  const auto gm = a.subset == 0 ? heis::grid_metric(a.k) : heis::grid_subset(a.k, a.subset, ctx.seed);
  const auto nt = is_negative_type(gm.metric);
  Report r;
  r.body = io::to_json(gm.metric);
  r.body.update({{"points", point_list(gm.points)},
            {"negative_type", {{"value", nt.negative_type}, {"min_eigenvalue", nt.min_eigenvalue}}},
            {"triangle_violations", check_metric(gm.metric).size()}});
  r.csv = io::metric_to_csv(gm.metric);
  return r;
}

Report cmd_distortion(const FiniteMetric& d, const RunContext&) {
  const auto cert = cutcone::c1_exact(d);
  Report r;
  r.body = {{"certificate", io::to_json(cert)}, {"checks", residual_flags(cert.residuals)}};
  return r;
}

Report cmd_gap_metric(const FiniteMetric& d, const RunContext& ctx) {
  const auto cert = cutcone::c1_exact(d);
  const auto g = sdp::gap_lower_bound_from_metric(d, ctx.settings.sdp);
  const double tol = 2e-3;
  Report r;
  r.body = {{"source", "metric"},
            {"n", d.size()},
            {"c1", cert.c1},
            {"report", io::to_json(g)},
            {"checks",
             {{"gap_equals_c1", std::abs(g.gap - cert.c1) <= tol},
              {"witness_ratio_is_inverse_c1", std::abs(g.witness_ratio - 1.0 / cert.c1) <= 1e-6},
              {"sdp_residuals_ok", g.residuals.psd <= sdp::kSolutionTol && g.residuals.triangle <= sdp::kSolutionTol},
              {"tolerance", tol}}},
            {"certificate", io::to_json(cert)}};
  return r;
}

Report cmd_gap_instance(const sparsest::DemandInstance& inst, const RunContext& ctx) {
  const auto g = sdp::integrality_gap(inst, ctx.settings.sdp);
  Report r;
  r.body = {{"source", "instance"},
            {"n", inst.size()},
            {"report", io::to_json(g)},
            {"argmin_members", members(g.argmin, inst.size())},
            {"checks",
             {{"relaxation_holds", g.gap >= 1.0 - sdp::kRelaxationSlack},
              {"sdp_residuals_ok", g.residuals.psd <= sdp::kSolutionTol && g.residuals.triangle <= sdp::kSolutionTol}}}};
  return r;
}

Report cmd_sdp_solve(const sparsest::DemandInstance& inst, const RunContext& ctx) {
  const auto s = sdp::solve_gl_sdp(inst, ctx.settings.sdp);
  Report r;
  r.body = {{"n", inst.size()}, {"solution", io::to_json(s)}};
  return r;
}

Report cmd_sparsest(const sparsest::DemandInstance& inst, const SparsestArgs& a, const RunContext& ctx) {
  const auto best = sparsest::phi_star(inst, ctx.threads);
  Report r;
  r.body = {{"n", inst.size()},
            {"phi_star", best.value},
            {"argmin", best.argmin},
            {"argmin_members", members(best.argmin, inst.size())}};
  if (a.l1_trials > 0) {
    const double slack = sparsest::phi_star_l1_check(inst, a.l1_trials, ctx.seed);
    r.body["l1_check"] = {{"trials", a.l1_trials}, {"worst_slack", slack}, {"holds", slack >= -1e-9}};
  }
  return r;
}

Report cmd_monotone(const MonotoneArgs& a, const RunContext& ctx) {
  const auto& cfg = ctx.settings.experiment;
  const auto grid = geo::ball_grid(a.ball, cfg.h);
  const auto e = geo::voxelize(parse_set(a.set), grid.box, cfg.h);
  const auto sample = lines_for(a.ball, ctx);
  const auto nm = geo::nm_ball(e, a.ball, sample, ctx.threads);
  const auto per = geo::perimeter_kinematic(e, a.ball, sample, cfg.delta, cfg.gamma, ctx.threads);
  const auto m = geo::measure_in_ball(e, a.ball);
  Report r;
  const double floor = 3.0 * nm.std_error;
  r.body = {{"set", a.set},
            {"ball", io::to_json(a.ball)},
            {"grid", {{"nx", grid.nx}, {"ny", grid.ny}, {"nz", grid.nz}, {"h", grid.h}, {"hz", grid.hz}}},
            {"nm", io::to_json(nm)},
            {"noise_floor", floor},
            {"above_noise_floor", nm.mean > floor},
            {"perimeter", {{"per", per.per}, {"std_error", per.std_error}, {"scales", io::to_json(per.scales)}}},
            {"measure", {{"inside", m.inside}, {"outside", m.outside}}}};
  if (m.inside > 0.0 && m.outside > 0.0 && per.per > 0.0)
    r.body["isoperimetric_ratio"] = geo::isoperimetric_ratio(e, a.ball, sample, cfg.gamma);
  else
    r.body["isoperimetric_ratio"] = nullptr;
  if (a.fit && m.inside > 0.0 && m.outside > 0.0) {
    const auto fit = geo::fit_halfspace(e, a.ball);
    r.body["halfspace_fit"] = {{"normal", fit.plane.normal}, {"offset", fit.plane.offset}, {"symdiff", fit.symdiff}};
  }
  std::ostringstream csv;
  csv << "j,w_j\n";
  for (std::size_t j = 0; j < per.scales.weights.size(); ++j) csv << j << ',' << csv_number(per.scales.weights[j]) << '\n';
  r.csv = csv.str();
  return r;
}

Report cmd_collapse(const CollapseArgs& a, const RunContext& ctx) {
  const auto f = parse_map(a.map, ctx.seed);
  const auto samples = geo::central_samples(a.ball, a.columns, a.per_column);
  const double lip = geo::validate_lipschitz(f, samples);
  json rows = json::array();
  std::ostringstream csv;
  csv << "epsilon,strategy,ratio,r,pairs,blocks\n";
  for (double eps : a.epsilons) {
    for (auto strategy : {geo::CollapseStrategy::GridScan, geo::CollapseStrategy::SegmentPartition}) {
      json row{{"epsilon", eps}, {"strategy", geo::to_string(strategy)}};
      try {
        const auto rep = geo::collapse_search(f, samples, a.ball, eps, strategy, ctx.settings.experiment);
        row["ratio"] = rep.ratio;
        row["r"] = rep.r;
        row["p"] = io::to_json(rep.p);
        row["q"] = io::to_json(rep.q);
        row["pairs"] = rep.pairs_scanned;
        row["blocks"] = rep.blocks;
        csv << csv_number(eps) << ',' << geo::to_string(strategy) << ',' << csv_number(rep.ratio) << ','
            << csv_number(rep.r) << ',' << rep.pairs_scanned << ',' << rep.blocks << '\n';
      } catch (const DomainError& err) {
        row["ratio"] = nullptr;
        row["error"] = err.what();
        csv << csv_number(eps) << ',' << geo::to_string(strategy) << ",,,0,0\n";
      }
      rows.push_back(std::move(row));
    }
  }
  Report r;
  r.body = {{"map", a.map},
            {"ball", io::to_json(a.ball)},
            {"samples", samples.size()},
            {"max_sampled_lipschitz_ratio", lip},
            {"rows", std::move(rows)}};
  r.csv = csv.str();
  return r;
}

Report cmd_scale_select(const ScaleArgs& a, const RunContext& ctx) {
  const auto& cfg = ctx.settings.experiment;
  const auto f = parse_map(a.map, ctx.seed);
  const auto grid = geo::ball_grid(a.ball, cfg.h);
  // Thresholds span the values of f on voxel centers inside the ball.
  std::vector<double> lo(f.dims, std::numeric_limits<double>::infinity());
  std::vector<double> hi(f.dims, -std::numeric_limits<double>::infinity());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const auto c = grid.center(idx);
    if (!heis::contains(a.ball, c)) continue;
    const auto v = f.f(c);
    for (std::size_t i = 0; i < f.dims; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  std::vector<std::vector<double>> thresholds;
  for (std::size_t i = 0; i < f.dims; ++i) {
    if (!(hi[i] > lo[i])) throw DomainError("map is constant on the ball").with("coordinate", static_cast<double>(i));
    thresholds.push_back(geo::uniform_thresholds(lo[i], hi[i], a.steps));
  }
  const auto cm = geo::cut_measure_of_map(f.f, f.dims, grid, thresholds);
  const auto sel = geo::select_scale(cm, a.ball, lines_for(a.ball, ctx), cfg.delta, cfg.scale, cfg.gamma);
  Report r;
  r.body = {{"map", a.map},
            {"ball", io::to_json(a.ball)},
            {"atoms", cm.atoms.size()},
            {"total_weight", cm.total_weight()},
            {"decomposition", io::to_json(sel.decomposition)},
            {"total", sel.total},
            {"j", sel.j},
            {"y", io::to_json(sel.y)},
            {"class_budget", sel.class_budget},
            {"local_budget", sel.local_budget},
            {"local_weight", sel.local_weight},
            {"candidates", sel.candidates.size()}};
  if (!a.manifest_dir.empty()) {
    auto manifest = io::write_cut_measure(cm, a.manifest_dir, "atom");
    io::write_json((std::filesystem::path(a.manifest_dir) / "cut_measure.json").string(), manifest);
    r.body["cut_measure_manifest"] = (std::filesystem::path(a.manifest_dir) / "cut_measure.json").string();
  }
  std::ostringstream csv;
  csv << "j,w_j\n";
  for (std::size_t j = 0; j < sel.decomposition.weights.size(); ++j)
    csv << j << ',' << csv_number(sel.decomposition.weights[j]) << '\n';
  r.csv = csv.str();
  return r;
}

Report cmd_calibrate_oracle(const OracleArgs& a, const RunContext& ctx) {
  if (!(a.h > 0.0) || a.levels == 0) throw DomainError("oracle needs h > 0 and at least one level");
  const heis::HBall ball{{0.0, 0.0, 0.0}, 1.0};
  const auto sample = lines_for(ball, ctx);
  const auto slab = parse_set("slab:-0.1,0.1");
  const auto half = parse_set("halfspace:1,0,0,0");
  json rows = json::array();
  std::ostringstream csv;
  csv << "h,slab_nm,slab_nm_se,half_nm,half_nm_se,half_iso,half_per,slab_fit_symdiff\n";
  double h = a.h;
  for (std::size_t level = 0; level < a.levels; ++level, h *= 0.5) {
    const auto grid = geo::ball_grid(ball, h);
    const auto es = geo::voxelize(slab, grid.box, h);
    const auto eh = geo::voxelize(half, grid.box, h);
    const auto nms = geo::nm_ball(es, ball, sample, ctx.threads);
    const auto nmh = geo::nm_ball(eh, ball, sample, ctx.threads);
    const double iso = geo::isoperimetric_ratio(eh, ball, sample, ctx.settings.experiment.gamma);
    const double per = geo::perimeter_kinematic(eh, ball, sample, ctx.settings.experiment.delta,
                                                ctx.settings.experiment.gamma, ctx.threads)
                           .per;
    const double fit = geo::fit_halfspace(es, ball).symdiff;
    rows.push_back({{"h", h},
                    {"slab_nm", io::to_json(nms)},
                    {"halfspace_nm", io::to_json(nmh)},
                    {"halfspace_isoperimetric_ratio", iso},
                    {"halfspace_perimeter", per},
                    {"slab_fit_symdiff", fit}});
    csv << csv_number(h) << ',' << csv_number(nms.mean) << ',' << csv_number(nms.std_error) << ','
        << csv_number(nmh.mean) << ',' << csv_number(nmh.std_error) << ',' << csv_number(iso) << ','
        << csv_number(per) << ',' << csv_number(fit) << '\n';
  }
  Report r;
  r.body = {{"ball", io::to_json(ball)}, {"lines", sample.lines.size()}, {"levels", std::move(rows)}};
  r.csv = csv.str();
  return r;
}

json strip_timing(json report) {
  if (report.contains("manifest")) report["manifest"].erase("wall_time");
  return report;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Structural:
    case ErrorKind::Domain:
    case ErrorKind::Precondition: return 2;
    case ErrorKind::Convergence: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::Internal: return 1;
  }
  return 1;
}

void print_error(const std::string& kind, const std::string& message, const json& details = json::object()) {
  std::cerr << json{{"error", kind}, {"message", message}, {"details", details}}.dump() << std::endl;
}

heis::HBall ball_of(const std::vector<double>& center, double radius) {
  if (center.size() != 3) throw StructuralError("--center expects x,y,z");
  return heis::make_ball({center[0], center[1], center[2]}, radius);
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
  CLI::App cli{"Sparsest-cut integrality-gap workbench"};
  cli.require_subcommand(1);
  cli.fallthrough();
  cli.set_version_flag("--version", kVersion);

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string config_path;
  cli.add_option("--seed", seed, "Random seed")->capture_default_str();
  cli.add_option("--threads", threads, "Worker threads (never changes results)")
      ->envname("GAP_WORKBENCH_THREADS")
      ->check(CLI::Range(1U, 64U))
      ->capture_default_str();
  cli.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);

  std::string out, csv_out;
  auto outputs = [&](CLI::App* sub, bool with_csv) {
    sub->add_option("--out", out, "Report path (default: stdout)");
    if (with_csv) sub->add_option("--csv", csv_out, "CSV mirror path");
  };

  GridArgs grid_args;
  auto* grid = cli.add_subcommand("grid", "rho on the integer grid {0..k}^3 or a seeded subset");
  grid->add_option("-k,--k", grid_args.k, "Grid side")->required();
  grid->add_option("--subset", grid_args.subset, "Subset size (0: full grid)");
  outputs(grid, true);

  std::string metric_path, instance_path;
  auto* distortion = cli.add_subcommand("distortion", "Exact c1 with primal and dual certificate");
  distortion->add_option("--metric", metric_path, "Metric file (.json or .csv)")->required();
  outputs(distortion, false);

  auto* gap = cli.add_subcommand("gap", "Integrality gap of an instance, or the dual instance of a metric");
  auto* gap_metric = gap->add_option("--metric", metric_path, "Metric file");
  auto* gap_instance = gap->add_option("--instance", instance_path, "Instance file (.json or edge list)");
  gap_metric->excludes(gap_instance);
  outputs(gap, false);

  auto* sdp_cmd = cli.add_subcommand("sdp", "Goemans-Linial relaxation");
  sdp_cmd->require_subcommand(1);
  auto* solve = sdp_cmd->add_subcommand("solve", "Solve the relaxation for an instance");
  std::optional<double> sdp_tol;
  std::optional<std::size_t> sdp_iter;
  solve->add_option("--instance", instance_path, "Instance file")->required();
  solve->add_option("--tol", sdp_tol, "Objective tolerance");
  solve->add_option("--max-iter", sdp_iter, "Iteration cap");
  outputs(solve, false);

  SparsestArgs sparsest_args;
  auto* sparsest_cmd = cli.add_subcommand("sparsest", "Exact sparsest cut by enumeration");
  sparsest_cmd->add_option("--instance", instance_path, "Instance file")->required();
  sparsest_cmd->add_option("--l1-trials", sparsest_args.l1_trials, "Random L1 configurations to check");
  outputs(sparsest_cmd, false);

  std::vector<double> center{0.0, 0.0, 0.0};
  double radius = 1.0;
  auto ball_options = [&](CLI::App* sub) {
    sub->add_option("--center", center, "Ball center x,y,z")->delimiter(',')->expected(3);
    sub->add_option("--radius", radius, "Ball radius");
  };

  MonotoneArgs monotone_args;
  bool no_fit = false;
  auto* monotone = cli.add_subcommand("monotone", "Non-monotonicity, perimeter and half-space fit of a set");
  monotone->add_option("--set", monotone_args.set, "Set spec")->required();
  monotone->add_flag("--no-fit", no_fit, "Skip the half-space fit");
  ball_options(monotone);
  outputs(monotone, true);

  CollapseArgs collapse_args;
  auto* collapse = cli.add_subcommand("collapse", "Central-collapse search over a list of epsilons");
  collapse->add_option("--map", collapse_args.map, "Map spec")->required();
  collapse->add_option("--eps", collapse_args.epsilons, "Epsilon list")->delimiter(',');
  collapse->add_option("--columns", collapse_args.columns, "Sample columns per axis");
  collapse->add_option("--per-column", collapse_args.per_column, "Samples per column");
  ball_options(collapse);
  outputs(collapse, true);

  ScaleArgs scale_args;
  auto* scale = cli.add_subcommand("scale-select", "Scale decomposition and (j, y) selection for a map");
  scale->add_option("--map", scale_args.map, "Map spec")->required();
  scale->add_option("--steps", scale_args.steps, "Thresholds per coordinate");
  scale->add_option("--manifest-dir", scale_args.manifest_dir, "Write the cut measure here");
  ball_options(scale);
  outputs(scale, true);

  OracleArgs oracle_args;
  auto* oracle = cli.add_subcommand("calibrate-oracle", "Fixture quantities at h, h/2, h/4");
  oracle->add_option("--voxel-size", oracle_args.h, "Coarsest voxel edge h");
  oracle->add_option("--levels", oracle_args.levels, "Number of resolutions");
  outputs(oracle, true);

  std::vector<const char*> raw;
  raw.reserve(argv.size());
  for (const auto& s : argv) raw.push_back(s.c_str());
  try {
    cli.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    RunContext ctx;
    ctx.seed = seed;
    ctx.threads = threads;
    json inputs = json::object();
    if (!config_path.empty()) {
      ctx.settings = settings_from_json(io::read_json(config_path));
      inputs["config"] = {{"path", config_path}, {"fnv1a", io::file_hash(config_path)}};
    }
    auto input = [&](const char* key, const std::string& path) {
      inputs[key] = {{"path", path}, {"fnv1a", io::file_hash(path)}};
    };

    std::string command;
    json args;
    Report report;
    if (grid->parsed()) {
      command = "grid";
      args = {{"k", grid_args.k}, {"subset", grid_args.subset}};
      report = cmd_grid(grid_args, ctx);
    } else if (distortion->parsed()) {
      command = "distortion";
      input("metric", metric_path);
      report = cmd_distortion(io::read_metric(metric_path), ctx);
    } else if (gap->parsed()) {
      command = "gap";
      if (!metric_path.empty()) {
        input("metric", metric_path);
        report = cmd_gap_metric(io::read_metric(metric_path), ctx);
      } else if (!instance_path.empty()) {
        input("instance", instance_path);
        report = cmd_gap_instance(io::read_instance(instance_path), ctx);
      } else {
        throw StructuralError("gap needs --metric or --instance");
      }
    } else if (solve->parsed()) {
      command = "sdp solve";
      if (sdp_tol) ctx.settings.sdp.tol = *sdp_tol;
      if (sdp_iter) ctx.settings.sdp.max_iter = *sdp_iter;
      input("instance", instance_path);
      report = cmd_sdp_solve(io::read_instance(instance_path), ctx);
    } else if (sparsest_cmd->parsed()) {
      command = "sparsest";
      args = {{"l1_trials", sparsest_args.l1_trials}};
      input("instance", instance_path);
      report = cmd_sparsest(io::read_instance(instance_path), sparsest_args, ctx);
    } else if (monotone->parsed()) {
      command = "monotone";
      monotone_args.ball = ball_of(center, radius);
      monotone_args.fit = !no_fit;
      args = {{"set", monotone_args.set}, {"ball", io::to_json(monotone_args.ball)}, {"fit", monotone_args.fit}};
      report = cmd_monotone(monotone_args, ctx);
    } else if (collapse->parsed()) {
      command = "collapse";
      collapse_args.ball = ball_of(center, radius);
      args = {{"map", collapse_args.map},
              {"epsilons", collapse_args.epsilons},
              {"columns", collapse_args.columns},
              {"per_column", collapse_args.per_column},
              {"ball", io::to_json(collapse_args.ball)}};
      report = cmd_collapse(collapse_args, ctx);
    } else if (scale->parsed()) {
      command = "scale-select";
      scale_args.ball = ball_of(center, radius);
      args = {{"map", scale_args.map}, {"steps", scale_args.steps}, {"ball", io::to_json(scale_args.ball)}};
      report = cmd_scale_select(scale_args, ctx);
    } else if (oracle->parsed()) {
      command = "calibrate-oracle";
      args = {{"h", oracle_args.h}, {"levels", oracle_args.levels}};
      report = cmd_calibrate_oracle(oracle_args, ctx);
    }
    if (args.is_null()) args = json::object();

    json outs = json::array();
    outs.push_back(out.empty() ? "-" : out);
    const bool write_csv = !csv_out.empty() && !report.csv.empty();
    if (write_csv) outs.push_back(csv_out);
    if (report.body.contains("cut_measure_manifest")) outs.push_back(report.body["cut_measure_manifest"]);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.body["manifest"] = {
        {"command", command},
        {"config", {{"args", args}, {"settings", to_json(ctx.settings)}}},
        {"seed", seed},
        {"versions",
         {{"gapbench", kVersion},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION}}},
        {"inputs", inputs},
        {"outputs", outs},
        {"wall_time", wall}};

    if (out.empty())
      std::cout << report.body.dump(2) << std::endl;
    else
      io::write_json(out, report.body);
    if (write_csv) io::write_text(csv_out, report.csv);
    return 0;
  } catch (const Error& e) {
    json details = json::object();
    for (const auto& [k, v] : e.details()) details[k] = v;
    print_error(to_string(e.kind()), e.what(), details);
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    print_error("io", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}

}  // namespace gapbench::app
