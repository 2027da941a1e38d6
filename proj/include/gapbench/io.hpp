#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gapbench/cutcone.hpp"
#include "gapbench/geomeasure.hpp"
#include "gapbench/heisenberg.hpp"
#include "gapbench/metric.hpp"
#include "gapbench/sdp.hpp"
#include "gapbench/sparsestcut.hpp"

namespace gapbench::io {

using json = nlohmann::json;

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
json read_json(const std::string& path);
/// Two-space indent plus trailing newline, the canonical report encoding.
void write_json(const std::string& path, const json& j);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

// Metrics: {"n": n, "d": [[...]]}, or CSV with a header row p0,p1,...
json to_json(const FiniteMetric& d);
FiniteMetric metric_from_json(const json& j);
std::string metric_to_csv(const FiniteMetric& d);
FiniteMetric metric_from_csv(const std::string& text);
/// Dispatches on the extension (.csv, otherwise JSON).
FiniteMetric read_metric(const std::string& path);

// Instances: {"n": n, "C": [[...]], "D": [[...]]}.
json to_json(const sparsest::DemandInstance& inst);
sparsest::DemandInstance instance_from_json(const json& j);
/// Edge list for a uniform instance: first line n, then one "i j" per line;
/// blank lines and lines starting with '#' are ignored.
sparsest::DemandInstance instance_from_edge_list(const std::string& text);
/// .json files are instances, anything else an edge list.
sparsest::DemandInstance read_instance(const std::string& path);

json to_json(const cutcone::DistortionCertificate& cert);
json to_json(const sdp::Residuals& r);
json to_json(const sdp::SDPSolution& s);
json to_json(const sdp::GapReport& g);

json to_json(const heis::HPoint& p);  // [x, y, z]
heis::HPoint point_from_json(const json& j);
json to_json(const heis::HBall& b);
heis::HBall ball_from_json(const json& j);
json to_json(const heis::LineSample& s);
heis::LineSample line_sample_from_json(const json& j);

/// Writes each atom to `<dir>/<stem>_<k>.gbvx` and returns the manifest
/// {"atoms": [{"file", "weight", "label", "voxels"}]}; paths are relative to dir.
json write_cut_measure(const geo::CutMeasure& cm, const std::string& dir, const std::string& stem);
geo::CutMeasure read_cut_measure(const json& manifest, const std::string& dir);

json to_json(const geo::ScaleDecomposition& s);
json to_json(const geo::MonteCarlo& mc);

}  // namespace gapbench::io
