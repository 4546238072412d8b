#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/generative.hpp"
#include "partshare/lattice.hpp"

namespace partshare {

/// Per-level instrumentation. One config_evaluation = scoring one
/// (position, type, configuration) triple: r child lookups, r additions and
/// its slot in one running max. Off-lattice configurations count too (the
/// evaluation happens; the score is -inf).
struct OpCounter {
  std::vector<std::int64_t> config_evaluations;         // index = level, [0] unused
  std::vector<std::int64_t> max_selections;             // one per (type, cell) maximized
  std::vector<std::int64_t> top_down_evaluations;       // nodes expanded per level
  std::vector<std::int64_t> model_selection_comparisons;  // only level H is nonzero

  explicit OpCounter(int levels_H = 0) { resize(levels_H); }
  void resize(int levels_H);
  int levels() const { return static_cast<int>(config_evaluations.size()) - 1; }
  std::int64_t total_config_evaluations() const;
  OpCounter& operator+=(const OpCounter&);
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

/// Level-0 evidence: log P(I(x)|tau) - log P(I(x)|tau_0) for every leaf
/// type and pixel. Throws AlphabetMismatch / ParamMismatch on shape clash.
struct UnaryTable {
  std::vector<std::vector<double>> by_type;  // [|M_0|][|D_0|]
};
UnaryTable leaf_evidence(const FeatureImage& image, const HierarchicalDictionary& dict,
                         const LatticeHierarchy& lat);

/// Which part types a bottom-up pass fills in.
struct Scope {
  bool full = true;
  int object_ordinal = -1;  // meaningful when !full
  static Scope full_dictionary() { return {true, -1}; }
  static Scope single_model(int object_ordinal) { return {false, object_ordinal}; }
};

/// Max-product evidence phi plus argmax backpointers for the in-scope types
/// at every level and cell. Scores are finite or -inf; -inf marks
/// configurations pushed off-lattice or impossible leaf symbols. Level-H
/// entries include the root prior log U(x_H) = -log|D_H|.
class EvidenceTable {
 public:
  struct LevelSlice {
    std::vector<int> type_ordinals;               // ascending
    std::vector<std::vector<double>> scores;      // [type slot][cell]
    std::vector<std::vector<std::int32_t>> backptr;  // empty at level 0
  };

  explicit EvidenceTable(int levels_H) : levels_(static_cast<std::size_t>(levels_H) + 1) {}
  int levels() const { return static_cast<int>(levels_.size()) - 1; }
  LevelSlice& slice(int h) { return levels_[static_cast<std::size_t>(h)]; }
  const LevelSlice& slice(int h) const { return levels_[static_cast<std::size_t>(h)]; }

  bool contains(int h, int type_ordinal) const;
  /// Throws ScopeUnresolvable when the type was not computed at that level.
  double score(int h, int type_ordinal, std::int64_t cell) const;
  std::int32_t backpointer(int h, int type_ordinal, std::int64_t cell) const;

 private:
  int slot(int h, int type_ordinal) const;
  std::vector<LevelSlice> levels_;
};

/// Fills phi bottom-up (levels 1..H) for the scope's types: full dictionary,
/// or the transitive closure of one top-level part. Every in-scope type is
/// evaluated exactly once per cell regardless of how many parents share it.
/// Deterministic order: level, then type ordinal, then cell, then config.
EvidenceTable bottom_up(const UnaryTable& unaries, const HierarchicalDictionary& dict,
                        const LatticeHierarchy& lat, const Scope& scope,
                        OpCounter& counter);

struct SelectedRoot {
  std::int64_t cell = -1;
  int type_ordinal = -1;
  double score = 0.0;
  friend bool operator==(const SelectedRoot&, const SelectedRoot&) = default;
};

/// Per top-level cell keeps the argmax type when its score exceeds T
/// (strictly). Ties go to the smaller type ordinal. Ascending cell order.
std::vector<SelectedRoot> select_models(const EvidenceTable& table,
                                        const HierarchicalDictionary& dict,
                                        double threshold, OpCounter& counter);

/// Recovers the argmax parse below a selected root by following
/// backpointers; ties were already broken toward the smaller configuration
/// index when the table was filled. Throws InvalidRoot when the root's
/// score is -inf.
ParseTree top_down(const EvidenceTable& table, const HierarchicalDictionary& dict,
                   const LatticeHierarchy& lat, const SelectedRoot& root,
                   OpCounter& counter);

enum class DetectMode { SerialShared, SerialUnshared, ParallelSim };
DetectMode detect_mode_from_name(const std::string&);
std::string detect_mode_name(DetectMode);

struct Detection {
  std::int64_t root_cell = -1;
  int type_ordinal = -1;
  double score = 0.0;
  ParseTree parse;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Order used to pick a single best detection: higher score first, then
/// smaller type ordinal, then smaller cell index.
bool detection_precedes(const Detection& a, const Detection& b);

/// Level-synchronous stage plan recorded by the parallel simulation.
struct ScheduleStage {
  enum class Kind { BottomUp, Selection, TopDown };
  Kind kind = Kind::BottomUp;
  int level = 0;        // meaningful for BottomUp / TopDown
  std::int64_t width = 0;  // independent tasks in the stage
};

struct ScheduleReport {
  std::vector<ScheduleStage> stages;
  std::int64_t neuron_count = 0;  // sum over h>=1 of |M_h| * |D_h|
  int depth() const { return static_cast<int>(stages.size()); }
};

struct DetectResult {
  std::vector<Detection> detections;  // ascending root cell
  OpCounter counter;
  std::optional<ScheduleReport> schedule;  // ParallelSim only
};

/// Full pipeline: leaf evidence, bottom-up (shared once / per object),
/// model selection, parse recovery for every above-threshold root.
/// All three modes return identical detections; the counters differ.
DetectResult detect_all(const FeatureImage& image, const HierarchicalDictionary& dict,
                        const LatticeHierarchy& lat, double threshold, DetectMode mode);

/// Type ordinals reachable from one top-level part, per level (ascending).
std::vector<std::vector<int>> type_closure(const HierarchicalDictionary& dict,
                                           int object_ordinal);

}  // namespace partshare
