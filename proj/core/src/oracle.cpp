#include "partshare/oracle.hpp"

#include <cmath>
#include <limits>

namespace partshare {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

struct Enumerator {
  const FeatureImage& image;
  const HierarchicalDictionary& dict;
  const LatticeHierarchy& lat;
  int H;
  int r;
  std::vector<std::vector<int>> types;          // fixed type tree
  std::vector<std::vector<std::int64_t>> cells; // candidate positions
  std::vector<std::pair<int, std::size_t>> internal_order;  // (level, j), level-major desc
  std::vector<int> assignment;                  // config per internal node

  Enumerator(const FeatureImage& img, const HierarchicalDictionary& d,
             const LatticeHierarchy& l, int object_ordinal)
      : image(img), dict(d), lat(l), H(d.levels()), r(d.fan_out()) {
    if (image.alphabet_size != dict.alphabet_size())
      throw AlphabetMismatch("image alphabet does not match the dictionary");
    if (image.rows != lat.extent(0).rows || image.cols != lat.extent(0).cols)
      throw ParamMismatch("image extent does not match the base lattice");
    if (dict.levels() != lat.levels())
      throw ParamMismatch("dictionary H does not match the lattice");
    if (object_ordinal < 0 || object_ordinal >= dict.level_size(H))
      throw IndexOutOfRange("no such top-level part");

    types.resize(static_cast<std::size_t>(H) + 1);
    cells.resize(static_cast<std::size_t>(H) + 1);
    for (int h = H; h >= 0; --h) {
      const std::size_t n = static_cast<std::size_t>(pow_i64(r, H - h));
      types[static_cast<std::size_t>(h)].resize(n);
      cells[static_cast<std::size_t>(h)].resize(n);
    }
    types[static_cast<std::size_t>(H)][0] = object_ordinal;
    for (int h = H; h >= 1; --h)
      for (std::size_t j = 0; j < types[static_cast<std::size_t>(h)].size(); ++j) {
        const PartType& part = dict.part(h, types[static_cast<std::size_t>(h)][j]);
        for (int i = 0; i < r; ++i)
          types[static_cast<std::size_t>(h) - 1][j * static_cast<std::size_t>(r) +
                                                  static_cast<std::size_t>(i)] =
              part.child_ordinals[static_cast<std::size_t>(i)];
      }
    for (int h = H; h >= 1; --h)
      for (std::size_t j = 0; j < types[static_cast<std::size_t>(h)].size(); ++j)
        internal_order.push_back({h, j});
    assignment.assign(internal_order.size(), 0);
  }

  // Places every node for the current assignment; false when something
  // falls off its lattice.
  bool place(std::int64_t root_cell) {
    cells[static_cast<std::size_t>(H)][0] = root_cell;
    const std::int64_t k = lat.axis_stride();
    for (const auto& [h, j] : internal_order) {
      const Extent& pe = lat.extent(h);
      const Extent& ce = lat.extent(h - 1);
      const std::int64_t cell = cells[static_cast<std::size_t>(h)][j];
      const std::int64_t pr = cell / pe.cols;
      const std::int64_t pc = cell % pe.cols;
      const PartType& part = dict.part(h, types[static_cast<std::size_t>(h)][j]);
      const Configuration& cfg =
          part.configs[static_cast<std::size_t>(assignment[index_of(h, j)])];
      for (int i = 0; i < r; ++i) {
        const Displacement& d = cfg.child_offsets[static_cast<std::size_t>(i)];
        const std::int64_t crow = pr * k + d.drow;
        const std::int64_t ccol = pc * k + d.dcol;
        if (crow < 0 || crow >= ce.rows || ccol < 0 || ccol >= ce.cols) return false;
        cells[static_cast<std::size_t>(h) - 1][j * static_cast<std::size_t>(r) +
                                                static_cast<std::size_t>(i)] =
            crow * ce.cols + ccol;
      }
    }
    return true;
  }

  std::size_t index_of(int h, std::size_t j) const {
    // internal_order is level-major descending with contiguous blocks.
    std::size_t base = 0;
    for (int lev = H; lev > h; --lev)
      base += static_cast<std::size_t>(pow_i64(r, H - lev));
    return base + j;
  }

  // Recursive score with the same accumulation shape as the DP recursion
  // (config log-prob first, then children in order), scored straight from
  // the image and dictionary.
  double subtree_score(int h, std::size_t j) const {
    if (h == 0) {
      const std::int64_t cell = cells[0][j];
      const int sym = image.symbols[static_cast<std::size_t>(cell)];
      const double pt = dict.part(0, types[0][j]).leaf_feature_dist[static_cast<std::size_t>(sym)];
      const double p0 = dict.background_dist()[static_cast<std::size_t>(sym)];
      return pt == 0.0 ? kNegInf : std::log(pt) - std::log(p0);
    }
    const PartType& part = dict.part(h, types[static_cast<std::size_t>(h)][j]);
    double s = part.configs[static_cast<std::size_t>(assignment[index_of(h, j)])].log_prob;
    for (int i = 0; i < r; ++i)
      s += subtree_score(h - 1, j * static_cast<std::size_t>(r) + static_cast<std::size_t>(i));
    return s;
  }

  bool advance() {
    const int C_r = dict.configs_per_part();
    int pos = static_cast<int>(assignment.size()) - 1;
    while (pos >= 0 && ++assignment[static_cast<std::size_t>(pos)] == C_r) {
      assignment[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    return pos >= 0;
  }

  ParseTree snapshot() const {
    ParseTree parse;
    parse.levels_H = H;
    parse.fan_out_r = r;
    parse.nodes.resize(static_cast<std::size_t>(H) + 1);
    for (int h = 0; h <= H; ++h) {
      auto& level_nodes = parse.nodes[static_cast<std::size_t>(h)];
      level_nodes.resize(types[static_cast<std::size_t>(h)].size());
      for (std::size_t j = 0; j < level_nodes.size(); ++j)
        level_nodes[j] = {types[static_cast<std::size_t>(h)][j],
                          cells[static_cast<std::size_t>(h)][j],
                          h == 0 ? -1 : assignment[index_of(h, j)]};
    }
    return parse;
  }
};

double assignments_per_root(const HierarchicalDictionary& dict) {
  double internal_nodes = 0;
  for (int h = dict.levels(); h >= 1; --h)
    internal_nodes += std::pow(static_cast<double>(dict.fan_out()), dict.levels() - h);
  return std::pow(static_cast<double>(dict.configs_per_part()), internal_nodes);
}

OracleResult run_search(const FeatureImage& image, const HierarchicalDictionary& dict,
                        const LatticeHierarchy& lat, int object_ordinal,
                        std::optional<std::int64_t> pinned_root, std::int64_t cap) {
  const double per_root = assignments_per_root(dict);
  const double roots =
      pinned_root ? 1.0 : static_cast<double>(lat.cells(lat.levels()));
  if (per_root * roots > static_cast<double>(cap))
    throw InstanceTooLarge("exhaustive search would visit " +
                           std::to_string(per_root * roots) + " candidates, cap is " +
                           std::to_string(cap));

  Enumerator en(image, dict, lat, object_ordinal);
  const double log_u = -std::log(static_cast<double>(lat.cells(lat.levels())));

  OracleResult best;
  best.score = kNegInf;
  const std::int64_t first = pinned_root ? *pinned_root : 0;
  const std::int64_t last = pinned_root ? *pinned_root + 1 : lat.cells(lat.levels());
  if (first < 0 || last > lat.cells(lat.levels()))
    throw IndexOutOfRange("root cell outside D_H");
  for (std::int64_t root = first; root < last; ++root) {
    std::fill(en.assignment.begin(), en.assignment.end(), 0);
    for (;;) {
      ++best.candidates_enumerated;
      if (en.place(root)) {
        double s = en.subtree_score(en.H, 0);
        s += log_u;
        if (s > best.score) {  // strict: ties keep the earliest candidate
          best.score = s;
          best.parse = en.snapshot();
        }
      }
      if (!en.advance()) break;
    }
  }
  return best;
}

}  // namespace

double brute_force_candidate_count(const HierarchicalDictionary& dict,
                                   const LatticeHierarchy& lat) {
  return assignments_per_root(dict) * static_cast<double>(lat.cells(lat.levels()));
}

OracleResult brute_force_map(const FeatureImage& image, const HierarchicalDictionary& dict,
                             const LatticeHierarchy& lat, int object_ordinal,
                             std::int64_t cap) {
  return run_search(image, dict, lat, object_ordinal, std::nullopt, cap);
}

OracleResult brute_force_global_evidence(const FeatureImage& image,
                                         const HierarchicalDictionary& dict,
                                         const LatticeHierarchy& lat, int object_ordinal,
                                         std::int64_t root_cell, std::int64_t cap) {
  return run_search(image, dict, lat, object_ordinal, root_cell, cap);
}

}  // namespace partshare
