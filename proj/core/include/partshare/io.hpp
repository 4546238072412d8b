#pragma once

#include <string>
#include <vector>

#include "partshare/complexity.hpp"
#include "partshare/dictionary.hpp"
#include "partshare/generative.hpp"
#include "partshare/inference.hpp"

namespace partshare::io {

/// Shortest decimal that round-trips the double exactly (17 significant
/// digits). Used for every float we serialize.
std::string fmt_g17(double v);

/// Text dictionary format. Header: kind, levels, fan-out, configs per part,
/// scale factor q, locality radius, alphabet size, background distribution;
/// then each level's parts (leaf rows at level 0; children + configs
/// above). Log-probs round-trip bit-exactly. Throws FormatError on
/// malformed input, and re-validates the dictionary on load.
void save_dictionary(const HierarchicalDictionary& dict, const std::string& path);
HierarchicalDictionary load_dictionary(const std::string& path);

/// Image format: first line "rows cols K", then row-major symbols, one
/// image row per line.
void save_image(const FeatureImage& image, const std::string& path);
FeatureImage load_image(const std::string& path);

/// Scene sidecar: seed, object count, then each parse (root type/cell plus
/// every node's type, cell and configuration index, level by level).
/// The image travels in its own file; the loaded Scene's image is empty.
void save_scene_sidecar(const Scene& scene, const std::string& path);
Scene load_scene_sidecar(const std::string& path);

/// Detections: "root_cell,type,score" CSV rows, plus a parse listing in the
/// sidecar node format for downstream consumers that need leaf sets.
void save_detections_csv(const std::vector<Detection>& detections, const std::string& path);
void save_detection_parses(const std::vector<Detection>& detections, const std::string& path);
std::vector<ParseTree> load_parse_list(const std::string& path);

/// Counter envelope JSON: run parameters, mode, per-level counters.
void save_counter_envelope(const CounterEnvelope& env, const std::string& path);
CounterEnvelope load_counter_envelope(const std::string& path);

/// Stage plan JSON: depth, neuron count, per-stage kind/level/width.
void save_schedule(const ScheduleReport& report, const std::string& path);

/// Per-level regime table:
/// "level,dictionary_size,shared_cost,unshared_cost,neurons".
void save_regime_curve(const RegimeReport& report, const std::string& path);

/// Measured-vs-predicted table: "level,predicted,measured,delta,exact".
void save_reconcile(const ReconcileReport& report, const std::string& path);

}  // namespace partshare::io
