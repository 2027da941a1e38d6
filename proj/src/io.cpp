#include "gapbench/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gapbench/errors.hpp"

namespace gapbench::io {

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << text;
  if (!os) throw IoError("failed writing " + path);
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) { return fnv1a_hex(read_text(path)); }

namespace {

// Rethrows nlohmann type errors as structural errors with context.
template <class F>
auto guarded(const char* what, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw StructuralError(std::string("invalid ") + what + ": " + e.what());
  }
}

std::vector<double> dense_from_rows(const json& rows, std::size_t n, const char* what) {
  if (!rows.is_array() || rows.size() != n) throw StructuralError(std::string(what) + " must have n rows");
  std::vector<double> out;
  out.reserve(n * n);
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != n) throw StructuralError(std::string(what) + " must be n x n");
    for (const auto& v : r) out.push_back(v.get<double>());
  }
  return out;
}

json rows_of(const std::vector<double>& dense, std::size_t n) {
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < n; ++j) r.push_back(dense[i * n + j]);
    rows.push_back(std::move(r));
  }
  return rows;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

json to_json(const FiniteMetric& d) { return {{"n", d.size()}, {"d", rows_of(d.dense(), d.size())}}; }

FiniteMetric metric_from_json(const json& j) {
  return guarded("metric", [&] {
    const auto n = j.at("n").get<std::size_t>();
    return FiniteMetric(n, dense_from_rows(j.at("d"), n, "d"));
  });
}

std::string metric_to_csv(const FiniteMetric& d) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t n = d.size();
  for (std::size_t j = 0; j < n; ++j) os << (j ? "," : "") << 'p' << j;
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) os << (j ? "," : "") << d(i, j);
    os << '\n';
  }
  return os.str();
}

FiniteMetric metric_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw StructuralError("empty metric CSV");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw StructuralError("non-numeric cell in metric CSV: " + cell);
      }
    }
    rows.push_back(std::move(row));
  }
  return FiniteMetric::from_rows(rows);
}

FiniteMetric read_metric(const std::string& path) {
  if (ends_with(path, ".csv")) return metric_from_csv(read_text(path));
  return metric_from_json(read_json(path));
}

json to_json(const sparsest::DemandInstance& inst) {
  return {{"n", inst.size()},
          {"C", rows_of(inst.capacities(), inst.size())},
          {"D", rows_of(inst.demands(), inst.size())}};
}

sparsest::DemandInstance instance_from_json(const json& j) {
  return guarded("instance", [&] {
    const auto n = j.at("n").get<std::size_t>();
    return sparsest::DemandInstance(n, dense_from_rows(j.at("C"), n, "C"), dense_from_rows(j.at("D"), n, "D"));
  });
}

sparsest::DemandInstance instance_from_edge_list(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::optional<std::size_t> n;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!n) {
      long long v = -1;
      if (!(ls >> v) || v < 2) throw StructuralError("edge list must start with n >= 2");
      n = static_cast<std::size_t>(v);
      continue;
    }
    long long a = -1, b = -1;
    if (!(ls >> a >> b) || a < 0 || b < 0 || static_cast<std::size_t>(a) >= *n ||
        static_cast<std::size_t>(b) >= *n || a == b)
      throw StructuralError("bad edge line: " + line);
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  if (!n) throw StructuralError("empty edge list");
  return sparsest::uniform_instance_from_edges(*n, edges);
}

sparsest::DemandInstance read_instance(const std::string& path) {
  if (ends_with(path, ".json")) return instance_from_json(read_json(path));
  return instance_from_edge_list(read_text(path));
}

json to_json(const cutcone::DistortionCertificate& cert) {
  const std::size_t n = cert.embedding.n;
  json atoms = json::array();
  for (const auto& a : cert.embedding.atoms) atoms.push_back({{"mask", a.mask}, {"weight", a.weight}});
  const auto& r = cert.residuals;
  return {{"n", n},
          {"c1", cert.c1},
          {"atoms", std::move(atoms)},
          {"dualC", rows_of(cert.dual_c, n)},
          {"dualD", rows_of(cert.dual_d, n)},
          {"lp_pivots", cert.lp_pivots},
          {"residuals",
           {{"primal_lower", r.primal_lower},
            {"primal_upper", r.primal_upper},
            {"cut_inequality", r.cut_inequality},
            {"phi_star_error", r.phi_star_error},
            {"ratio_error", r.ratio_error},
            {"lp_duality_gap", r.lp_duality_gap},
            {"lp_complementarity", r.lp_complementarity}}}};
}

json to_json(const sdp::Residuals& r) {
  return {{"primal", r.primal},   {"dual", r.dual},
          {"psd", r.psd},         {"triangle", r.triangle},
          {"normalization", r.normalization}, {"iterations", r.iterations}};
}

json to_json(const sdp::SDPSolution& s) {
  return {{"objective", s.objective},
          {"Q", rows_of(s.q.to_dense(), s.q.size())},
          {"d", rows_of(s.d.dense(), s.d.size())},
          {"residuals", to_json(s.residuals)}};
}

json to_json(const sdp::GapReport& g) {
  json j{{"phi_star", g.phi_star},
         {"m_star", g.m_star},
         {"gap", g.gap},
         {"argmin", g.argmin},
         {"residuals", to_json(g.residuals)}};
  if (g.c1 > 0.0) {
    j["c1"] = g.c1;
    j["witness_ratio"] = g.witness_ratio;
  }
  return j;
}

json to_json(const heis::HPoint& p) { return json::array({p.x, p.y, p.z}); }

heis::HPoint point_from_json(const json& j) {
  return guarded("point", [&] {
    if (!j.is_array() || j.size() != 3) throw StructuralError("point must be [x, y, z]");
    return heis::HPoint{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  });
}

json to_json(const heis::HBall& b) { return {{"center", to_json(b.center)}, {"radius", b.radius}}; }

heis::HBall ball_from_json(const json& j) {
  return guarded("ball", [&] { return heis::make_ball(point_from_json(j.at("center")), j.at("radius").get<double>()); });
}

json to_json(const heis::LineSample& s) {
  json lines = json::array();
  for (const auto& l : s.lines) lines.push_back({{"base", to_json(l.base)}, {"theta", l.theta}});
  return {{"seed", s.seed}, {"region", to_json(s.region)}, {"weight", s.weight}, {"lines", std::move(lines)}};
}

heis::LineSample line_sample_from_json(const json& j) {
  return guarded("line sample", [&] {
    heis::LineSample s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.region = ball_from_json(j.at("region"));
    for (const auto& l : j.at("lines")) s.lines.push_back({point_from_json(l.at("base")), l.at("theta").get<double>()});
    s.weight = s.lines.empty() ? 0.0 : 1.0 / static_cast<double>(s.lines.size());
    return s;
  });
}

json write_cut_measure(const geo::CutMeasure& cm, const std::string& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  json atoms = json::array();
  for (std::size_t k = 0; k < cm.atoms.size(); ++k) {
    const auto& a = cm.atoms[k];
    const std::string file = stem + "_" + std::to_string(k) + ".gbvx";
    a.set.write((std::filesystem::path(dir) / file).string());
    atoms.push_back({{"file", file}, {"weight", a.weight}, {"label", a.label}, {"voxels", a.set.count()}});
  }
  return {{"atoms", std::move(atoms)}};
}

geo::CutMeasure read_cut_measure(const json& manifest, const std::string& dir) {
  return guarded("cut measure manifest", [&] {
    geo::CutMeasure cm;
    for (const auto& a : manifest.at("atoms")) {
      const double w = a.at("weight").get<double>();
      if (!(w > 0.0)) throw StructuralError("cut measure weights must be positive");
      auto set = geo::VoxelSet::read((std::filesystem::path(dir) / a.at("file").get<std::string>()).string());
      cm.atoms.push_back({std::move(set), w, a.value("label", std::string{})});
    }
    return cm;
  });
}

json to_json(const geo::ScaleDecomposition& s) {
  json j{{"delta", s.delta}, {"weights", s.weights}};
  j["selected_j"] = s.selected_j ? json(*s.selected_j) : json(nullptr);
  j["selected_y"] = s.selected_y ? to_json(*s.selected_y) : json(nullptr);
  return j;
}

json to_json(const geo::MonteCarlo& mc) {
  return {{"mean", mc.mean}, {"std_error", mc.std_error}, {"samples", mc.samples}};
}

}  // namespace gapbench::io
