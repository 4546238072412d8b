#pragma once

#include <cstdint>
#include <optional>

#include "partshare/generative.hpp"
#include "partshare/inference.hpp"

namespace partshare {

/// Result of exhaustive search. score is -inf and parse absent when no
/// configuration assignment keeps every node on its lattice.
struct OracleResult {
  double score = 0.0;
  std::optional<ParseTree> parse;
  std::int64_t candidates_enumerated = 0;
};

/// Number of (root, configuration assignment) candidates exhaustive search
/// would visit: |D_H| * C_r^(number of internal nodes).
double brute_force_candidate_count(const HierarchicalDictionary& dict,
                                   const LatticeHierarchy& lat);

/// Exhaustive MAP for a single object type: every root position times every
/// configuration choice at every internal node, scored directly from the
/// model equations (leaf log-ratios + configuration log-probs + log U).
/// Never reads DP tables. Enumeration order (roots ascending; assignments
/// lexicographic over nodes, level-major descending) matches the DP
/// tie-breaking, so argmax parses are comparable. Throws InstanceTooLarge
/// when the candidate count exceeds `cap`.
OracleResult brute_force_map(const FeatureImage& image, const HierarchicalDictionary& dict,
                             const LatticeHierarchy& lat, int object_ordinal,
                             std::int64_t cap = 10'000'000);

/// Same search with the root pinned at `root_cell`; comparable to the
/// evidence-table entry at (H, object, root_cell).
OracleResult brute_force_global_evidence(const FeatureImage& image,
                                         const HierarchicalDictionary& dict,
                                         const LatticeHierarchy& lat, int object_ordinal,
                                         std::int64_t root_cell,
                                         std::int64_t cap = 10'000'000);

}  // namespace partshare
