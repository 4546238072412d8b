#include "partshare/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace partshare {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

void check_pipeline_shapes(const FeatureImage& image, const HierarchicalDictionary& dict,
                           const LatticeHierarchy& lat) {
  if (image.alphabet_size != dict.alphabet_size())
    throw AlphabetMismatch("image alphabet " + std::to_string(image.alphabet_size) +
                           " vs dictionary alphabet " +
                           std::to_string(dict.alphabet_size()));
  const Extent& e = lat.extent(0);
  if (image.rows != e.rows || image.cols != e.cols)
    throw ParamMismatch("image extent does not match the base lattice");
  if (dict.levels() != lat.levels())
    throw ParamMismatch("dictionary H does not match the lattice");
  if (dict.kind() != lat.kind() || dict.axis_stride() != lat.axis_stride())
    throw ParamMismatch("dictionary grid geometry does not match the lattice");
}

}  // namespace

void OpCounter::resize(int levels_H) {
  config_evaluations.assign(static_cast<std::size_t>(levels_H) + 1, 0);
  max_selections.assign(static_cast<std::size_t>(levels_H) + 1, 0);
  top_down_evaluations.assign(static_cast<std::size_t>(levels_H) + 1, 0);
  model_selection_comparisons.assign(static_cast<std::size_t>(levels_H) + 1, 0);
}

std::int64_t OpCounter::total_config_evaluations() const {
  std::int64_t total = 0;
  for (std::int64_t v : config_evaluations) total += v;
  return total;
}

OpCounter& OpCounter::operator+=(const OpCounter& other) {
  if (levels() != other.levels()) throw ParamMismatch("merging counters of different depth");
  for (std::size_t h = 0; h < config_evaluations.size(); ++h) {
    config_evaluations[h] += other.config_evaluations[h];
    max_selections[h] += other.max_selections[h];
    top_down_evaluations[h] += other.top_down_evaluations[h];
    model_selection_comparisons[h] += other.model_selection_comparisons[h];
  }
  return *this;
}

UnaryTable leaf_evidence(const FeatureImage& image, const HierarchicalDictionary& dict,
                         const LatticeHierarchy& lat) {
  check_pipeline_shapes(image, dict, lat);
  const std::int64_t cells = lat.cells(0);
  UnaryTable table;
  table.by_type.resize(static_cast<std::size_t>(dict.level_size(0)));
  for (std::size_t t = 0; t < table.by_type.size(); ++t) {
    const std::vector<double>& dist = dict.part(0, static_cast<int>(t)).leaf_feature_dist;
    auto& row = table.by_type[t];
    row.resize(static_cast<std::size_t>(cells));
    for (std::int64_t p = 0; p < cells; ++p) {
      const int sym = image.symbols[static_cast<std::size_t>(p)];
      const double pt = dist[static_cast<std::size_t>(sym)];
      const double p0 = dict.background_dist()[static_cast<std::size_t>(sym)];
      row[static_cast<std::size_t>(p)] =
          pt == 0.0 ? kNegInf : std::log(pt) - std::log(p0);
    }
  }
  return table;
}

bool EvidenceTable::contains(int h, int type_ordinal) const {
  const auto& slice = levels_[static_cast<std::size_t>(h)];
  return std::binary_search(slice.type_ordinals.begin(), slice.type_ordinals.end(),
                            type_ordinal);
}

int EvidenceTable::slot(int h, int type_ordinal) const {
  const auto& slice = levels_[static_cast<std::size_t>(h)];
  auto it = std::lower_bound(slice.type_ordinals.begin(), slice.type_ordinals.end(),
                             type_ordinal);
  if (it == slice.type_ordinals.end() || *it != type_ordinal)
    throw ScopeUnresolvable("type (" + std::to_string(h) + "," +
                            std::to_string(type_ordinal) + ") is outside this table's scope");
  return static_cast<int>(it - slice.type_ordinals.begin());
}

double EvidenceTable::score(int h, int type_ordinal, std::int64_t cell) const {
  return levels_[static_cast<std::size_t>(h)]
      .scores[static_cast<std::size_t>(slot(h, type_ordinal))]
      [static_cast<std::size_t>(cell)];
}

std::int32_t EvidenceTable::backpointer(int h, int type_ordinal, std::int64_t cell) const {
  return levels_[static_cast<std::size_t>(h)]
      .backptr[static_cast<std::size_t>(slot(h, type_ordinal))]
      [static_cast<std::size_t>(cell)];
}

std::vector<std::vector<int>> type_closure(const HierarchicalDictionary& dict,
                                           int object_ordinal) {
  if (object_ordinal < 0 || object_ordinal >= dict.level_size(dict.levels()))
    throw ScopeUnresolvable("no top-level part " + std::to_string(object_ordinal));
  std::vector<std::set<int>> reach(static_cast<std::size_t>(dict.levels()) + 1);
  reach[static_cast<std::size_t>(dict.levels())].insert(object_ordinal);
  for (int h = dict.levels(); h >= 1; --h)
    for (int ord : reach[static_cast<std::size_t>(h)])
      for (int child : dict.part(h, ord).child_ordinals)
        reach[static_cast<std::size_t>(h) - 1].insert(child);
  std::vector<std::vector<int>> out(reach.size());
  for (std::size_t h = 0; h < reach.size(); ++h)
    out[h].assign(reach[h].begin(), reach[h].end());
  return out;
}

EvidenceTable bottom_up(const UnaryTable& unaries, const HierarchicalDictionary& dict,
                        const LatticeHierarchy& lat, const Scope& scope,
                        OpCounter& counter) {
  if (dict.levels() != lat.levels())
    throw ParamMismatch("dictionary H does not match the lattice");
  if (counter.levels() != dict.levels())
    throw ParamMismatch("counter depth does not match the dictionary");
  if (static_cast<std::int64_t>(unaries.by_type.size()) != dict.level_size(0))
    throw ParamMismatch("unary table does not cover M_0");

  const int H = dict.levels();
  std::vector<std::vector<int>> in_scope;
  if (scope.full) {
    in_scope.resize(static_cast<std::size_t>(H) + 1);
    for (int h = 0; h <= H; ++h)
      for (std::int64_t t = 0; t < dict.level_size(h); ++t)
        in_scope[static_cast<std::size_t>(h)].push_back(static_cast<int>(t));
  } else {
    in_scope = type_closure(dict, scope.object_ordinal);
  }

  EvidenceTable table(H);
  // Level 0: copy the in-scope unary rows verbatim.
  {
    auto& slice = table.slice(0);
    slice.type_ordinals = in_scope[0];
    slice.scores.reserve(slice.type_ordinals.size());
    for (int ord : slice.type_ordinals)
      slice.scores.push_back(unaries.by_type[static_cast<std::size_t>(ord)]);
  }

  const std::int64_t k = lat.axis_stride();
  const double log_u = -std::log(static_cast<double>(lat.cells(H)));

  for (int h = 1; h <= H; ++h) {
    const auto& child_slice = table.slice(h - 1);
    auto& slice = table.slice(h);
    slice.type_ordinals = in_scope[static_cast<std::size_t>(h)];
    const Extent& pe = lat.extent(h);
    const Extent& ce = lat.extent(h - 1);
    const std::int64_t cells = pe.cells();

    for (int ord : slice.type_ordinals) {
      const PartType& part = dict.part(h, ord);
      // Resolve child rows once per type.
      std::vector<const std::vector<double>*> child_scores;
      child_scores.reserve(part.child_ordinals.size());
      for (int child : part.child_ordinals) {
        auto it = std::lower_bound(child_slice.type_ordinals.begin(),
                                   child_slice.type_ordinals.end(), child);
        if (it == child_slice.type_ordinals.end() || *it != child)
          throw ScopeUnresolvable("child type missing from the level below");
        child_scores.push_back(
            &child_slice.scores[static_cast<std::size_t>(it - child_slice.type_ordinals.begin())]);
      }

      std::vector<double> scores(static_cast<std::size_t>(cells), kNegInf);
      std::vector<std::int32_t> backptr(static_cast<std::size_t>(cells), -1);
      for (std::int64_t cell = 0; cell < cells; ++cell) {
        const std::int64_t pr = cell / pe.cols;
        const std::int64_t pc = cell % pe.cols;
        const std::int64_t ar = pr * k;  // parent anchor in child-lattice units
        const std::int64_t ac = pc * k;
        double best = kNegInf;
        std::int32_t best_cfg = -1;
        for (std::size_t cfg = 0; cfg < part.configs.size(); ++cfg) {
          ++counter.config_evaluations[static_cast<std::size_t>(h)];
          const Configuration& c = part.configs[cfg];
          double s = c.log_prob;
          for (std::size_t i = 0; i < c.child_offsets.size(); ++i) {
            const Displacement& d = c.child_offsets[i];
            const std::int64_t crow = ar + d.drow;
            const std::int64_t ccol = ac + d.dcol;
            if (crow < 0 || crow >= ce.rows || ccol < 0 || ccol >= ce.cols) {
              s = kNegInf;
              break;
            }
            s += (*child_scores[i])[static_cast<std::size_t>(crow * ce.cols + ccol)];
          }
          if (s > best) {
            best = s;
            best_cfg = static_cast<std::int32_t>(cfg);
          }
        }
        ++counter.max_selections[static_cast<std::size_t>(h)];
        if (h == H) best += log_u;  // fold the root prior into the top level
        scores[static_cast<std::size_t>(cell)] = best;
        backptr[static_cast<std::size_t>(cell)] = best_cfg;
      }
      slice.scores.push_back(std::move(scores));
      slice.backptr.push_back(std::move(backptr));
    }
  }
  return table;
}

std::vector<SelectedRoot> select_models(const EvidenceTable& table,
                                        const HierarchicalDictionary& dict,
                                        double threshold, OpCounter& counter) {
  const int H = table.levels();
  const auto& slice = table.slice(H);
  if (slice.type_ordinals.empty()) throw ScopeUnresolvable("no top-level types in scope");
  const std::int64_t cells = static_cast<std::int64_t>(slice.scores[0].size());
  counter.model_selection_comparisons[static_cast<std::size_t>(H)] +=
      static_cast<std::int64_t>(slice.type_ordinals.size()) * cells;

  std::vector<SelectedRoot> out;
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    double best = kNegInf;
    int best_type = -1;
    for (std::size_t slot = 0; slot < slice.type_ordinals.size(); ++slot) {
      const double s = slice.scores[slot][static_cast<std::size_t>(cell)];
      if (s > best) {  // strict: ties keep the smaller ordinal
        best = s;
        best_type = slice.type_ordinals[slot];
      }
    }
    if (best_type >= 0 && best > threshold) out.push_back({cell, best_type, best});
  }
  return out;
}

ParseTree top_down(const EvidenceTable& table, const HierarchicalDictionary& dict,
                   const LatticeHierarchy& lat, const SelectedRoot& root,
                   OpCounter& counter) {
  const int H = table.levels();
  const double root_score = table.score(H, root.type_ordinal, root.cell);
  if (root_score == kNegInf)
    throw InvalidRoot("no finite-score derivation at the requested root");

  const int r = dict.fan_out();
  ParseTree parse;
  parse.levels_H = H;
  parse.fan_out_r = r;
  parse.nodes.resize(static_cast<std::size_t>(H) + 1);
  for (int h = 0; h <= H; ++h)
    parse.nodes[static_cast<std::size_t>(h)].assign(
        static_cast<std::size_t>(pow_i64(r, H - h)), ParseNode{});
  parse.nodes[static_cast<std::size_t>(H)][0] = {root.type_ordinal, root.cell, -1};

  const std::int64_t k = lat.axis_stride();
  for (int h = H; h >= 1; --h) {
    auto& level_nodes = parse.nodes[static_cast<std::size_t>(h)];
    auto& child_nodes = parse.nodes[static_cast<std::size_t>(h) - 1];
    const Extent& pe = lat.extent(h);
    const Extent& ce = lat.extent(h - 1);
    for (std::size_t j = 0; j < level_nodes.size(); ++j) {
      ParseNode& node = level_nodes[j];
      ++counter.top_down_evaluations[static_cast<std::size_t>(h)];
      const std::int32_t cfg = table.backpointer(h, node.type_ordinal, node.cell);
      node.config_index = cfg;
      const PartType& part = dict.part(h, node.type_ordinal);
      const Configuration& chosen = part.configs[static_cast<std::size_t>(cfg)];
      const std::int64_t pr = node.cell / pe.cols;
      const std::int64_t pc = node.cell % pe.cols;
      for (int i = 0; i < r; ++i) {
        const Displacement& d = chosen.child_offsets[static_cast<std::size_t>(i)];
        const std::int64_t crow = pr * k + d.drow;
        const std::int64_t ccol = pc * k + d.dcol;
        child_nodes[j * static_cast<std::size_t>(r) + static_cast<std::size_t>(i)] = {
            part.child_ordinals[static_cast<std::size_t>(i)], crow * ce.cols + ccol, -1};
      }
    }
  }
  return parse;
}

bool detection_precedes(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.type_ordinal != b.type_ordinal) return a.type_ordinal < b.type_ordinal;
  return a.root_cell < b.root_cell;
}

DetectMode detect_mode_from_name(const std::string& s) {
  if (s == "serial-shared") return DetectMode::SerialShared;
  if (s == "serial-unshared") return DetectMode::SerialUnshared;
  if (s == "parallel-sim") return DetectMode::ParallelSim;
  throw ConfigError("unknown mode '" + s +
                    "' (serial-shared|serial-unshared|parallel-sim)");
}

std::string detect_mode_name(DetectMode m) {
  switch (m) {
    case DetectMode::SerialShared: return "serial-shared";
    case DetectMode::SerialUnshared: return "serial-unshared";
    case DetectMode::ParallelSim: return "parallel-sim";
  }
  return "?";
}

DetectResult detect_all(const FeatureImage& image, const HierarchicalDictionary& dict,
                        const LatticeHierarchy& lat, double threshold, DetectMode mode) {
  check_pipeline_shapes(image, dict, lat);
  const int H = dict.levels();
  DetectResult result;
  result.counter.resize(H);
  const UnaryTable unaries = leaf_evidence(image, dict, lat);

  if (mode == DetectMode::SerialUnshared) {
    const std::int64_t num_objects = dict.level_size(H);
    std::vector<EvidenceTable> tables;
    tables.reserve(static_cast<std::size_t>(num_objects));
    for (int o = 0; o < num_objects; ++o)
      tables.push_back(
          bottom_up(unaries, dict, lat, Scope::single_model(o), result.counter));

    // Merged model selection across the per-object tables; same values and
    // comparison order as the shared table, so identical detections.
    const std::int64_t cells = lat.cells(H);
    result.counter.model_selection_comparisons[static_cast<std::size_t>(H)] +=
        num_objects * cells;
    for (std::int64_t cell = 0; cell < cells; ++cell) {
      double best = kNegInf;
      int best_type = -1;
      for (int o = 0; o < num_objects; ++o) {
        const double s = tables[static_cast<std::size_t>(o)].score(H, o, cell);
        if (s > best) {
          best = s;
          best_type = o;
        }
      }
      if (best_type >= 0 && best > threshold) {
        SelectedRoot root{cell, best_type, best};
        Detection det{cell, best_type, best,
                      top_down(tables[static_cast<std::size_t>(best_type)], dict, lat,
                               root, result.counter)};
        result.detections.push_back(std::move(det));
      }
    }
    return result;
  }

  // serial-shared and parallel-sim run the same arithmetic once over the
  // full dictionary; parallel-sim additionally records the stage plan.
  EvidenceTable table =
      bottom_up(unaries, dict, lat, Scope::full_dictionary(), result.counter);
  std::vector<SelectedRoot> roots = select_models(table, dict, threshold, result.counter);
  for (const SelectedRoot& root : roots)
    result.detections.push_back(
        {root.cell, root.type_ordinal, root.score,
         top_down(table, dict, lat, root, result.counter)});

  if (mode == DetectMode::ParallelSim) {
    ScheduleReport schedule;
    for (int h = 1; h <= H; ++h) {
      const std::int64_t width = dict.level_size(h) * lat.cells(h);
      schedule.stages.push_back({ScheduleStage::Kind::BottomUp, h, width});
      schedule.neuron_count += width;
    }
    schedule.stages.push_back({ScheduleStage::Kind::Selection, H, lat.cells(H)});
    if (!result.detections.empty()) {
      const std::int64_t n = static_cast<std::int64_t>(result.detections.size());
      for (int h = H; h >= 1; --h)
        schedule.stages.push_back({ScheduleStage::Kind::TopDown, h,
                                   n * pow_i64(dict.fan_out(), H - h)});
    }
    result.schedule = std::move(schedule);
  }
  return result;
}

}  // namespace partshare
