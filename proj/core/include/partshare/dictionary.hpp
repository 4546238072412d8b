#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "partshare/lattice.hpp"
#include "partshare/rng.hpp"

namespace partshare {

/// Child offset relative to the parent's representative coordinate,
/// in level-(h-1) lattice steps. 1-D dictionaries keep drow == 0.
struct Displacement {
  std::int64_t drow = 0;
  std::int64_t dcol = 0;
  friend bool operator==(const Displacement&, const Displacement&) = default;
  friend auto operator<=>(const Displacement&, const Displacement&) = default;
};

/// One way of laying out the r children of a part, with its log-probability.
struct Configuration {
  std::vector<Displacement> child_offsets;  // size r
  double log_prob = 0.0;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct PartId {
  int level = 0;
  int ordinal = 0;
  friend bool operator==(const PartId&, const PartId&) = default;
};

/// A reusable part: a composition of r level-(h-1) subparts (levels >= 1)
/// or a leaf feature model (level 0).
struct PartType {
  PartId id;
  std::vector<int> child_ordinals;        // empty iff level 0
  std::vector<Configuration> configs;     // C_r entries; empty at level 0
  std::vector<double> leaf_feature_dist;  // K probabilities; level 0 only
};

/// Per-level part reuse statistics.
struct SharingStats {
  struct Level {
    int level = 0;
    std::int64_t distinct = 0;    // |M_h|
    std::int64_t references = 0;  // child slots pointing here from level h+1
    double ratio = 0.0;           // references / distinct (0 at level H)
    std::vector<std::int64_t> per_part;  // reference count per ordinal
  };
  std::vector<Level> levels;  // [0..H]
};

/// Layered part dictionaries M_0..M_H with a fixed fan-out r and a fixed
/// number of configurations C_r per composed part.
class HierarchicalDictionary {
 public:
  /// `axis_stride` is the per-axis subsample step k between consecutive
  /// levels (so q = 1/k for 1-D, 1/k^2 for 2-D). `locality_radius` <= 0
  /// selects the default k/2.
  HierarchicalDictionary(GridKind kind, std::int64_t axis_stride, int levels_H,
                         int fan_out_r, int configs_per_part,
                         double locality_radius, int alphabet_size,
                         std::vector<double> background_dist);

  /// Appends a level-0 feature model; returns its ordinal.
  int add_leaf_type(std::vector<double> feature_dist);

  /// Validates and appends a composed part at `level`; returns its ordinal.
  /// Throws BadChildLevel (level/child references), LocalityViolation
  /// (displacement magnitude or f-consistency), UnnormalizedConfigs
  /// (config count, non-finite log-probs, or sum exp(logp) != 1).
  int compose(int level, std::vector<int> child_ordinals,
              std::vector<Configuration> configs);

  /// Re-checks every stored part against the compose rules.
  void validate() const;

  int levels() const { return H_; }
  int fan_out() const { return r_; }
  int configs_per_part() const { return C_r_; }
  GridKind kind() const { return kind_; }
  std::int64_t axis_stride() const { return k_; }
  double locality_radius() const { return locality_radius_; }
  int alphabet_size() const { return K_; }
  const std::vector<double>& background_dist() const { return background_; }

  std::int64_t level_size(int h) const;  // |M_h|
  std::vector<std::int64_t> level_sizes_above_base() const;  // |M_1|..|M_H|
  const PartType& part(int level, int ordinal) const;
  const std::vector<PartType>& level(int h) const;

  SharingStats shared_subpart_count() const;

  /// True when a configuration is admissible for a level-`level` part:
  /// within the locality radius and centroid-consistent (the rounded child
  /// centroid snaps back to the parent cell).
  bool config_admissible(int level, const Configuration& c) const;

 private:
  void check_part_level(int level) const;

  GridKind kind_;
  std::int64_t k_;
  int H_;
  int r_;
  int C_r_;
  double locality_radius_;
  int K_;
  std::vector<double> background_;
  std::vector<std::vector<PartType>> levels_;
};

enum class RegimeKind { ExponentialGrowth, UserSupplied, ExponentialDecrease };

/// How dictionary sizes |M_1|..|M_H| scale with level.
struct RegimeSpec {
  RegimeKind kind = RegimeKind::UserSupplied;
  std::int64_t growth_constant = 1;     // ExponentialGrowth: |M_h| = a / q^h
  std::vector<std::int64_t> sizes;      // UserSupplied: |M_1|..|M_H|

  static RegimeSpec growth(std::int64_t a) { return {RegimeKind::ExponentialGrowth, a, {}}; }
  static RegimeSpec user(std::vector<std::int64_t> s) { return {RegimeKind::UserSupplied, 1, std::move(s)}; }
  static RegimeSpec decrease() { return {RegimeKind::ExponentialDecrease, 1, {}}; }

  /// |M_1|..|M_H|; throws UnrealizableRegime when a size is not a positive
  /// integer (growth) or the user list has the wrong length.
  std::vector<std::int64_t> level_sizes(int H, int r, const Rational& q) const;

  std::string name() const;
  static RegimeKind kind_from_name(const std::string&);
};

struct RegimeDictionaryOptions {
  std::int64_t num_leaf_types = 0;  // 0 = regime default (2; r^H for decrease)
  int alphabet_size = 5;
  double locality_radius = 0.0;     // <= 0 = default k/2
  bool uniform_config_probs = false;
};

/// Draws a dictionary with the regime's level sizes. Deterministic in
/// (regime, kind, k, H, r, C_r, seed, options). ExponentialDecrease wires
/// children as a partition, so every part has exactly one parent. Throws
/// UnrealizableRegime when |M_h| exceeds the number of distinct
/// compositions available.
HierarchicalDictionary build_regime_dictionary(
    const RegimeSpec& regime, GridKind kind, std::int64_t axis_stride, int H,
    int r, int C_r, std::uint64_t seed, const RegimeDictionaryOptions& opts = {});

/// All admissible configurations for a composed part at `level`:
/// r pairwise-distinct displacements within the locality radius, centroid
/// snapping back to the parent. Lexicographic order; log_prob unset (0).
std::vector<Configuration> enumerate_admissible_configs(
    const HierarchicalDictionary& dict, int level);

}  // namespace partshare
