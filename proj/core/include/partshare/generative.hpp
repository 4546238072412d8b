#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/lattice.hpp"
#include "partshare/rng.hpp"

namespace partshare {

/// Dense symbol grid over D_0. 1-D images have rows == 1.
struct FeatureImage {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  int alphabet_size = 0;
  std::vector<int> symbols;  // row-major, each in [0, alphabet_size)

  int at(const Coord& c) const { return symbols[static_cast<std::size_t>(c.row * cols + c.col)]; }
  int& at(const Coord& c) { return symbols[static_cast<std::size_t>(c.row * cols + c.col)]; }
  friend bool operator==(const FeatureImage&, const FeatureImage&) = default;
};

struct ParseNode {
  int type_ordinal = -1;   // part ordinal at the node's level
  std::int64_t cell = -1;  // cell index on that level's lattice
  int config_index = -1;   // chosen configuration; -1 at leaves
  friend bool operator==(const ParseNode&, const ParseNode&) = default;
};

struct LeafObservation {
  Coord coord;   // D_0 coordinate
  int type = 0;  // level-0 part ordinal
  friend bool operator==(const LeafObservation&, const LeafObservation&) = default;
  friend auto operator<=>(const LeafObservation&, const LeafObservation&) = default;
};

/// Instantiated object: a complete r-ary derivation of one top-level part.
/// Level h holds r^(H-h) nodes; children of nodes[h][j] are
/// nodes[h-1][j*r + i] for i in 0..r-1.
struct ParseTree {
  int levels_H = 0;
  int fan_out_r = 0;
  std::vector<std::vector<ParseNode>> nodes;  // [0..H]

  const ParseNode& root() const { return nodes[static_cast<std::size_t>(levels_H)][0]; }
  int object_type() const { return root().type_ordinal; }

  /// Leaf assignments sorted by D_0 position (row-major).
  std::vector<LeafObservation> leaf_set(const LatticeHierarchy& lat) const;
  bool leaves_distinct() const;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

struct Scene {
  std::uint64_t seed = 0;
  std::vector<ParseTree> objects;
  FeatureImage image;
};

/// Samples a derivation of object `object_ordinal` (a member of M_H)
/// top-down: a configuration per node, children placed at parent anchor +
/// displacement. Root drawn uniformly over D_H when `root_cell` is absent.
/// Draws that land off-lattice or collide at the leaves are rejected and
/// the whole parse resampled, up to `max_retries`; then OverlapUnresolvable.
ParseTree sample_parse(const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                       int object_ordinal, std::optional<std::int64_t> root_cell,
                       Rng& rng, int max_retries = 100);

/// Draws every pixel: leaf pixels from their leaf type's feature
/// distribution, all others from the background distribution. Row-major
/// draw order (deterministic given the rng state).
FeatureImage render(const std::vector<LeafObservation>& leaves,
                    const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                    Rng& rng);

/// With probability `noise`, independently resamples each pixel from the
/// background distribution. noise = 0 leaves the image untouched.
void apply_background_noise(FeatureImage& image, const HierarchicalDictionary& dict,
                            double noise, Rng& rng);

/// Samples a multi-object scene: root cells drawn without replacement on
/// D_H, objects parsed in order with cross-object leaf collisions rejected
/// (per-object retry budget), then a single render pass.
/// Throws GenerativeError when more objects are requested than |D_H|,
/// OverlapUnresolvable when the retry budget runs out.
Scene sample_scene(const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                   const std::vector<int>& object_ordinals, std::uint64_t seed,
                   double noise = 0.0, int max_retries = 100);

/// log P(parse, image) - log P(image | all background) contribution of one
/// object: leaf log-ratios + configuration log-probs + log U(x_H).
double parse_log_likelihood_ratio(const ParseTree& parse, const FeatureImage& image,
                                  const HierarchicalDictionary& dict,
                                  const LatticeHierarchy& lat);

/// Sum of parse_log_likelihood_ratio over the scene's objects (0 when empty).
double scene_log_likelihood_ratio(const Scene& scene, const HierarchicalDictionary& dict,
                                  const LatticeHierarchy& lat);

}  // namespace partshare
