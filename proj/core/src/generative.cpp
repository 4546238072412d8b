#include "partshare/generative.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace partshare {
namespace {

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// One top-down sampling attempt; returns false when a child lands off its
// lattice or two leaves collide.
bool try_sample(const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                int object_ordinal, std::int64_t root_cell, Rng& rng, ParseTree& out) {
  const int H = dict.levels();
  const int r = dict.fan_out();
  out.levels_H = H;
  out.fan_out_r = r;
  out.nodes.assign(static_cast<std::size_t>(H) + 1, {});
  for (int h = 0; h <= H; ++h)
    out.nodes[static_cast<std::size_t>(h)].assign(
        static_cast<std::size_t>(pow_i64(r, H - h)), ParseNode{});

  out.nodes[static_cast<std::size_t>(H)][0] = {object_ordinal, root_cell, -1};

  for (int h = H; h >= 1; --h) {
    auto& level_nodes = out.nodes[static_cast<std::size_t>(h)];
    auto& child_nodes = out.nodes[static_cast<std::size_t>(h) - 1];
    const Extent& child_extent = lat.extent(h - 1);
    for (std::size_t j = 0; j < level_nodes.size(); ++j) {
      ParseNode& node = level_nodes[j];
      const PartType& t = dict.part(h, node.type_ordinal);
      std::vector<double> probs(t.configs.size());
      for (std::size_t c = 0; c < probs.size(); ++c)
        probs[c] = std::exp(t.configs[c].log_prob);
      const int cfg = static_cast<int>(rng.next_categorical(probs));
      node.config_index = cfg;
      const Configuration& chosen = t.configs[static_cast<std::size_t>(cfg)];
      const Coord pc = lat.cell_coord(h, node.cell);
      for (int i = 0; i < r; ++i) {
        const Displacement& d = chosen.child_offsets[static_cast<std::size_t>(i)];
        const Coord cc{pc.row * lat.axis_stride() + d.drow,
                       pc.col * lat.axis_stride() + d.dcol};
        if (cc.row < 0 || cc.row >= child_extent.rows || cc.col < 0 ||
            cc.col >= child_extent.cols)
          return false;
        child_nodes[j * static_cast<std::size_t>(r) + static_cast<std::size_t>(i)] = {
            t.child_ordinals[static_cast<std::size_t>(i)],
            cc.row * child_extent.cols + cc.col, -1};
      }
    }
  }

  std::set<std::int64_t> seen;
  for (const ParseNode& leaf : out.nodes[0])
    if (!seen.insert(leaf.cell).second) return false;
  return true;
}

}  // namespace

std::vector<LeafObservation> ParseTree::leaf_set(const LatticeHierarchy& lat) const {
  std::vector<LeafObservation> out;
  out.reserve(nodes[0].size());
  for (const ParseNode& leaf : nodes[0])
    out.push_back({lat.to_base_coords(0, leaf.cell), leaf.type_ordinal});
  std::sort(out.begin(), out.end());
  return out;
}

bool ParseTree::leaves_distinct() const {
  std::set<std::int64_t> seen;
  for (const ParseNode& leaf : nodes[0])
    if (!seen.insert(leaf.cell).second) return false;
  return true;
}

ParseTree sample_parse(const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                       int object_ordinal, std::optional<std::int64_t> root_cell,
                       Rng& rng, int max_retries) {
  if (dict.levels() != lat.levels())
    throw ParamMismatch("dictionary and lattice disagree on H");
  if (object_ordinal < 0 || object_ordinal >= dict.level_size(dict.levels()))
    throw IndexOutOfRange("no such top-level part");
  ParseTree parse;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const std::int64_t root =
        root_cell ? *root_cell
                  : static_cast<std::int64_t>(rng.next_below(
                        static_cast<std::uint64_t>(lat.cells(lat.levels()))));
    if (root < 0 || root >= lat.cells(lat.levels()))
      throw IndexOutOfRange("root cell outside D_H");
    if (try_sample(dict, lat, object_ordinal, root, rng, parse)) return parse;
  }
  throw OverlapUnresolvable("no valid placement after " + std::to_string(max_retries) +
                            " attempts (leaf collisions or off-lattice children)");
}

FeatureImage render(const std::vector<LeafObservation>& leaves,
                    const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                    Rng& rng) {
  const Extent& e = lat.extent(0);
  FeatureImage img;
  img.rows = e.rows;
  img.cols = e.cols;
  img.alphabet_size = dict.alphabet_size();
  img.symbols.assign(static_cast<std::size_t>(e.cells()), 0);

  std::map<std::int64_t, int> leaf_at;  // pixel index -> leaf type
  for (const LeafObservation& obs : leaves)
    leaf_at[obs.coord.row * e.cols + obs.coord.col] = obs.type;

  for (std::int64_t p = 0; p < e.cells(); ++p) {
    auto hit = leaf_at.find(p);
    const std::vector<double>& dist =
        hit == leaf_at.end() ? dict.background_dist()
                             : dict.part(0, hit->second).leaf_feature_dist;
    img.symbols[static_cast<std::size_t>(p)] = static_cast<int>(rng.next_categorical(dist));
  }
  return img;
}

void apply_background_noise(FeatureImage& image, const HierarchicalDictionary& dict,
                            double noise, Rng& rng) {
  if (noise < 0.0 || noise > 1.0) throw GenerativeError("noise must lie in [0,1]");
  if (noise == 0.0) return;
  for (int& s : image.symbols)
    if (rng.next_unit() < noise)
      s = static_cast<int>(rng.next_categorical(dict.background_dist()));
}

Scene sample_scene(const HierarchicalDictionary& dict, const LatticeHierarchy& lat,
                   const std::vector<int>& object_ordinals, std::uint64_t seed,
                   double noise, int max_retries) {
  const std::int64_t top_cells = lat.cells(lat.levels());
  if (static_cast<std::int64_t>(object_ordinals.size()) > top_cells)
    throw GenerativeError("cannot place " + std::to_string(object_ordinals.size()) +
                          " objects on " + std::to_string(top_cells) + " top-level cells");
  Scene scene;
  scene.seed = seed;
  Rng rng(seed);
  const std::vector<std::int64_t> roots = rng.sample_without_replacement(
      top_cells, static_cast<std::int64_t>(object_ordinals.size()));

  std::set<std::int64_t> occupied;  // leaf pixels claimed so far
  for (std::size_t i = 0; i < object_ordinals.size(); ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_retries && !placed; ++attempt) {
      ParseTree parse = sample_parse(dict, lat, object_ordinals[i], roots[i], rng,
                                     max_retries);
      std::set<std::int64_t> mine;
      for (const ParseNode& leaf : parse.nodes[0]) mine.insert(leaf.cell);
      bool clash = false;
      for (std::int64_t p : mine)
        if (occupied.count(p)) { clash = true; break; }
      if (!clash) {
        occupied.insert(mine.begin(), mine.end());
        scene.objects.push_back(std::move(parse));
        placed = true;
      }
    }
    if (!placed)
      throw OverlapUnresolvable("object " + std::to_string(i) +
                                " kept colliding with earlier objects");
  }

  std::vector<LeafObservation> all_leaves;
  for (const ParseTree& parse : scene.objects) {
    auto ls = parse.leaf_set(lat);
    all_leaves.insert(all_leaves.end(), ls.begin(), ls.end());
  }
  scene.image = render(all_leaves, dict, lat, rng);
  apply_background_noise(scene.image, dict, noise, rng);
  return scene;
}

double parse_log_likelihood_ratio(const ParseTree& parse, const FeatureImage& image,
                                  const HierarchicalDictionary& dict,
                                  const LatticeHierarchy& lat) {
  double score = 0.0;
  for (const ParseNode& leaf : parse.nodes[0]) {
    const Coord c = lat.to_base_coords(0, leaf.cell);
    const int sym = image.at(c);
    const double p = dict.part(0, leaf.type_ordinal)
                         .leaf_feature_dist[static_cast<std::size_t>(sym)];
    const double p0 = dict.background_dist()[static_cast<std::size_t>(sym)];
    score += std::log(p) - std::log(p0);
  }
  for (int h = 1; h <= parse.levels_H; ++h)
    for (const ParseNode& node : parse.nodes[static_cast<std::size_t>(h)])
      score += dict.part(h, node.type_ordinal)
                   .configs[static_cast<std::size_t>(node.config_index)]
                   .log_prob;
  score += -std::log(static_cast<double>(lat.cells(lat.levels())));
  return score;
}

double scene_log_likelihood_ratio(const Scene& scene, const HierarchicalDictionary& dict,
                                  const LatticeHierarchy& lat) {
  double total = 0.0;
  for (const ParseTree& parse : scene.objects)
    total += parse_log_likelihood_ratio(parse, scene.image, dict, lat);
  return total;
}

}  // namespace partshare
