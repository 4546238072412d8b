#include "partshare/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace partshare {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > INT64_MAX / base) throw Error("integer overflow in pow");
    out *= base;
  }
  return out;
}

constexpr std::int64_t kCapacityCap = INT64_MAX / 2;

std::int64_t saturating_mul(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCapacityCap / b) return kCapacityCap;
  return a * b;
}

// C(n, k) saturated at kCapacityCap.
std::int64_t choose_sat(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 out = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    out = out * (n - k + i) / i;
    if (out > kCapacityCap) return kCapacityCap;
  }
  return static_cast<std::int64_t>(out);
}

void check_distribution(const std::vector<double>& dist, int K, const char* what) {
  if (static_cast<int>(dist.size()) != K)
    throw UnnormalizedConfigs(std::string(what) + " has " + std::to_string(dist.size()) +
                              " entries, alphabet has " + std::to_string(K));
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw UnnormalizedConfigs(std::string(what) + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw UnnormalizedConfigs(std::string(what) + " sums to " + std::to_string(sum));
}

}  // namespace

HierarchicalDictionary::HierarchicalDictionary(GridKind kind, std::int64_t axis_stride,
                                               int levels_H, int fan_out_r,
                                               int configs_per_part,
                                               double locality_radius,
                                               int alphabet_size,
                                               std::vector<double> background_dist)
    : kind_(kind),
      k_(axis_stride),
      H_(levels_H),
      r_(fan_out_r),
      C_r_(configs_per_part),
      locality_radius_(locality_radius > 0.0 ? locality_radius
                                             : static_cast<double>(axis_stride) / 2.0),
      K_(alphabet_size),
      background_(std::move(background_dist)) {
  if (axis_stride < 2) throw InvalidScale("axis stride must be >= 2");
  if (levels_H < 1) throw BadChildLevel("dictionary needs at least one composed level");
  if (fan_out_r < 1) throw BadChildLevel("fan-out must be >= 1");
  if (configs_per_part < 1) throw UnnormalizedConfigs("need at least one configuration per part");
  if (alphabet_size < 1) throw UnnormalizedConfigs("alphabet must be nonempty");
  check_distribution(background_, K_, "background distribution");
  levels_.resize(static_cast<std::size_t>(H_) + 1);
}

int HierarchicalDictionary::add_leaf_type(std::vector<double> feature_dist) {
  check_distribution(feature_dist, K_, "leaf feature distribution");
  PartType t;
  t.id = {0, static_cast<int>(levels_[0].size())};
  t.leaf_feature_dist = std::move(feature_dist);
  const int ordinal = t.id.ordinal;
  levels_[0].push_back(std::move(t));
  return ordinal;
}

void HierarchicalDictionary::check_part_level(int level) const {
  if (level < 1 || level > H_)
    throw BadChildLevel("composed parts live at levels 1.." + std::to_string(H_) +
                        ", got " + std::to_string(level));
}

bool HierarchicalDictionary::config_admissible(int level, const Configuration& c) const {
  if (static_cast<int>(c.child_offsets.size()) != r_) return false;
  const double rad2 = locality_radius_ * locality_radius_;
  std::int64_t sum_row = 0, sum_col = 0;
  for (const Displacement& d : c.child_offsets) {
    if (kind_ == GridKind::OneD && d.drow != 0) return false;
    const double mag2 = static_cast<double>(d.drow * d.drow + d.dcol * d.dcol);
    if (mag2 > rad2) return false;
    sum_row += d.drow;
    sum_col += d.dcol;
  }
  // Centroid consistency: the rounded child centroid (base-level units,
  // relative to the parent's representative coordinate) must snap back to
  // the parent cell: -k^level < 2m <= k^level per axis, where m rounds
  // half-up.
  const std::int64_t child_stride = pow_i64(k_, level - 1);
  const std::int64_t parent_step = child_stride * k_;
  auto centroid_ok = [&](std::int64_t sum_axis) {
    const std::int64_t m =
        floor_div(2 * sum_axis * child_stride + r_, 2 * static_cast<std::int64_t>(r_));
    return -parent_step < 2 * m && 2 * m <= parent_step;
  };
  return centroid_ok(sum_row) && centroid_ok(sum_col);
}

int HierarchicalDictionary::compose(int level, std::vector<int> child_ordinals,
                                    std::vector<Configuration> configs) {
  check_part_level(level);
  if (static_cast<int>(child_ordinals.size()) != r_)
    throw BadChildLevel("composition must reference exactly r=" + std::to_string(r_) +
                        " children, got " + std::to_string(child_ordinals.size()));
  const auto& below = levels_[static_cast<std::size_t>(level) - 1];
  for (int ord : child_ordinals)
    if (ord < 0 || ord >= static_cast<int>(below.size()))
      throw BadChildLevel("child ordinal " + std::to_string(ord) +
                          " does not exist at level " + std::to_string(level - 1));

  if (static_cast<int>(configs.size()) != C_r_)
    throw UnnormalizedConfigs("part must carry exactly C_r=" + std::to_string(C_r_) +
                              " configurations, got " + std::to_string(configs.size()));
  double prob_sum = 0.0;
  for (const Configuration& c : configs) {
    if (static_cast<int>(c.child_offsets.size()) != r_)
      throw UnnormalizedConfigs("configuration places " +
                                std::to_string(c.child_offsets.size()) +
                                " children, expected " + std::to_string(r_));
    if (!std::isfinite(c.log_prob))
      throw UnnormalizedConfigs("configuration log-probability is not finite");
    if (!config_admissible(level, c)) {
      for (const Displacement& d : c.child_offsets) {
        if (kind_ == GridKind::OneD && d.drow != 0)
          throw LocalityViolation("1-D dictionary with a row displacement");
        const double mag2 = static_cast<double>(d.drow * d.drow + d.dcol * d.dcol);
        if (mag2 > locality_radius_ * locality_radius_)
          throw LocalityViolation("displacement (" + std::to_string(d.drow) + "," +
                                  std::to_string(d.dcol) + ") exceeds locality radius " +
                                  std::to_string(locality_radius_));
      }
      throw LocalityViolation("configuration centroid does not snap back to the parent cell");
    }
    prob_sum += std::exp(c.log_prob);
  }
  if (std::abs(prob_sum - 1.0) > 1e-9)
    throw UnnormalizedConfigs("configuration probabilities sum to " +
                              std::to_string(prob_sum));

  PartType t;
  t.id = {level, static_cast<int>(levels_[static_cast<std::size_t>(level)].size())};
  t.child_ordinals = std::move(child_ordinals);
  t.configs = std::move(configs);
  levels_[static_cast<std::size_t>(level)].push_back(std::move(t));
  return levels_[static_cast<std::size_t>(level)].back().id.ordinal;
}

void HierarchicalDictionary::validate() const {
  if (levels_[0].empty()) throw BadChildLevel("dictionary has no leaf types");
  if (levels_[static_cast<std::size_t>(H_)].empty())
    throw BadChildLevel("dictionary has no top-level parts");
  for (const PartType& leaf : levels_[0]) {
    if (!leaf.child_ordinals.empty() || !leaf.configs.empty())
      throw BadChildLevel("level-0 part with children");
    check_distribution(leaf.leaf_feature_dist, K_, "leaf feature distribution");
  }
  for (int h = 1; h <= H_; ++h) {
    for (const PartType& t : levels_[static_cast<std::size_t>(h)]) {
      if (!t.leaf_feature_dist.empty())
        throw BadChildLevel("composed part with a feature distribution");
      if (static_cast<int>(t.child_ordinals.size()) != r_)
        throw BadChildLevel("part with wrong fan-out");
      for (int ord : t.child_ordinals)
        if (ord < 0 || ord >= static_cast<int>(levels_[static_cast<std::size_t>(h) - 1].size()))
          throw BadChildLevel("dangling child reference");
      if (static_cast<int>(t.configs.size()) != C_r_)
        throw UnnormalizedConfigs("part with wrong configuration count");
      double prob_sum = 0.0;
      for (const Configuration& c : t.configs) {
        if (!config_admissible(h, c))
          throw LocalityViolation("stored configuration violates locality/centroid rules");
        prob_sum += std::exp(c.log_prob);
      }
      if (std::abs(prob_sum - 1.0) > 1e-9)
        throw UnnormalizedConfigs("stored configuration probabilities unnormalized");
    }
  }
}

std::int64_t HierarchicalDictionary::level_size(int h) const {
  if (h < 0 || h > H_) throw IndexOutOfRange("no level " + std::to_string(h));
  return static_cast<std::int64_t>(levels_[static_cast<std::size_t>(h)].size());
}

std::vector<std::int64_t> HierarchicalDictionary::level_sizes_above_base() const {
  std::vector<std::int64_t> out;
  for (int h = 1; h <= H_; ++h) out.push_back(level_size(h));
  return out;
}

const PartType& HierarchicalDictionary::part(int level, int ordinal) const {
  if (level < 0 || level > H_ || ordinal < 0 || ordinal >= level_size(level))
    throw IndexOutOfRange("no part (" + std::to_string(level) + "," +
                          std::to_string(ordinal) + ")");
  return levels_[static_cast<std::size_t>(level)][static_cast<std::size_t>(ordinal)];
}

const std::vector<PartType>& HierarchicalDictionary::level(int h) const {
  if (h < 0 || h > H_) throw IndexOutOfRange("no level " + std::to_string(h));
  return levels_[static_cast<std::size_t>(h)];
}

SharingStats HierarchicalDictionary::shared_subpart_count() const {
  SharingStats stats;
  stats.levels.resize(static_cast<std::size_t>(H_) + 1);
  for (int h = 0; h <= H_; ++h) {
    auto& row = stats.levels[static_cast<std::size_t>(h)];
    row.level = h;
    row.distinct = level_size(h);
    row.per_part.assign(static_cast<std::size_t>(row.distinct), 0);
  }
  for (int h = 1; h <= H_; ++h) {
    auto& below = stats.levels[static_cast<std::size_t>(h) - 1];
    for (const PartType& t : levels_[static_cast<std::size_t>(h)])
      for (int ord : t.child_ordinals) {
        ++below.per_part[static_cast<std::size_t>(ord)];
        ++below.references;
      }
  }
  for (auto& row : stats.levels)
    row.ratio = row.distinct > 0
                    ? static_cast<double>(row.references) / static_cast<double>(row.distinct)
                    : 0.0;
  return stats;
}

std::vector<Configuration> enumerate_admissible_configs(
    const HierarchicalDictionary& dict, int level) {
  const std::int64_t R = static_cast<std::int64_t>(std::floor(dict.locality_radius()));
  std::vector<Displacement> singles;
  const double rad2 = dict.locality_radius() * dict.locality_radius();
  if (dict.kind() == GridKind::OneD) {
    for (std::int64_t c = -R; c <= R; ++c) singles.push_back({0, c});
  } else {
    for (std::int64_t rr = -R; rr <= R; ++rr)
      for (std::int64_t c = -R; c <= R; ++c)
        if (static_cast<double>(rr * rr + c * c) <= rad2) singles.push_back({rr, c});
  }
  std::sort(singles.begin(), singles.end());

  std::vector<Configuration> out;
  Configuration cur;
  cur.child_offsets.resize(static_cast<std::size_t>(dict.fan_out()));
  std::vector<std::size_t> pick(static_cast<std::size_t>(dict.fan_out()), 0);
  const std::size_t n = singles.size();
  const int r = dict.fan_out();
  // Odometer over ordered r-tuples of pairwise-distinct displacements.
  for (;;) {
    bool distinct = true;
    for (int i = 0; i < r && distinct; ++i)
      for (int j = i + 1; j < r; ++j)
        if (pick[static_cast<std::size_t>(i)] == pick[static_cast<std::size_t>(j)]) {
          distinct = false;
          break;
        }
    if (distinct) {
      for (int i = 0; i < r; ++i)
        cur.child_offsets[static_cast<std::size_t>(i)] = singles[pick[static_cast<std::size_t>(i)]];
      if (dict.config_admissible(level, cur)) out.push_back(cur);
    }
    int pos = r - 1;
    while (pos >= 0 && ++pick[static_cast<std::size_t>(pos)] == n) {
      pick[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

std::vector<std::int64_t> RegimeSpec::level_sizes(int H, int r, const Rational& q) const {
  std::vector<std::int64_t> out;
  switch (kind) {
    case RegimeKind::ExponentialGrowth: {
      if (growth_constant < 1)
        throw UnrealizableRegime("growth constant must be a positive integer");
      for (int h = 1; h <= H; ++h) {
        Rational size = q.pow(h);
        // |M_h| = a / q^h
        Rational m(growth_constant * size.den, size.num);
        if (!m.is_integer())
          throw UnrealizableRegime("a/q^h is not an integer at level " + std::to_string(h));
        out.push_back(m.as_int());
      }
      break;
    }
    case RegimeKind::UserSupplied: {
      if (static_cast<int>(sizes.size()) != H)
        throw UnrealizableRegime("user-supplied regime needs exactly H=" +
                                 std::to_string(H) + " sizes, got " +
                                 std::to_string(sizes.size()));
      for (std::int64_t s : sizes)
        if (s < 1) throw UnrealizableRegime("level sizes must be positive");
      out = sizes;
      break;
    }
    case RegimeKind::ExponentialDecrease: {
      for (int h = 1; h <= H; ++h) out.push_back(pow_i64(r, H - h));
      break;
    }
  }
  return out;
}

std::string RegimeSpec::name() const {
  switch (kind) {
    case RegimeKind::ExponentialGrowth: return "growth";
    case RegimeKind::UserSupplied: return "user";
    case RegimeKind::ExponentialDecrease: return "decrease";
  }
  return "?";
}

RegimeKind RegimeSpec::kind_from_name(const std::string& s) {
  if (s == "growth") return RegimeKind::ExponentialGrowth;
  if (s == "user") return RegimeKind::UserSupplied;
  if (s == "decrease") return RegimeKind::ExponentialDecrease;
  throw ConfigError("unknown regime '" + s + "' (growth|user|decrease)");
}

namespace {

std::vector<double> random_distribution(Rng& rng, int K) {
  std::vector<double> w(static_cast<std::size_t>(K));
  double sum = 0.0;
  for (double& x : w) {
    x = 0.2 + 0.8 * rng.next_unit();
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

std::vector<double> config_probs(Rng& rng, int C_r, bool uniform) {
  if (uniform)
    return std::vector<double>(static_cast<std::size_t>(C_r), 1.0 / static_cast<double>(C_r));
  return random_distribution(rng, C_r);
}

}  // namespace

HierarchicalDictionary build_regime_dictionary(const RegimeSpec& regime, GridKind kind,
                                               std::int64_t axis_stride, int H, int r,
                                               int C_r, std::uint64_t seed,
                                               const RegimeDictionaryOptions& opts) {
  const Rational q = kind == GridKind::OneD ? Rational(1, axis_stride)
                                            : Rational(1, axis_stride * axis_stride);
  const std::vector<std::int64_t> sizes = regime.level_sizes(H, r, q);

  std::int64_t leaf_count = opts.num_leaf_types;
  if (leaf_count <= 0)
    leaf_count = regime.kind == RegimeKind::ExponentialDecrease ? pow_i64(r, H) : 2;
  if (regime.kind == RegimeKind::ExponentialDecrease && leaf_count != pow_i64(r, H))
    throw UnrealizableRegime(
        "decrease regime partitions children; |M_0| must be r^H = " +
        std::to_string(pow_i64(r, H)));

  std::vector<double> background(static_cast<std::size_t>(opts.alphabet_size));
  background[0] = 0.6;
  for (std::size_t s = 1; s < background.size(); ++s)
    background[s] = 0.4 / static_cast<double>(opts.alphabet_size - 1);
  if (opts.alphabet_size == 1) background[0] = 1.0;

  HierarchicalDictionary dict(kind, axis_stride, H, r, C_r, opts.locality_radius,
                              opts.alphabet_size, std::move(background));
  Rng rng(seed);
  for (std::int64_t i = 0; i < leaf_count; ++i)
    dict.add_leaf_type(random_distribution(rng, opts.alphabet_size));

  for (int h = 1; h <= H; ++h) {
    const std::int64_t want = sizes[static_cast<std::size_t>(h) - 1];
    const std::int64_t below = dict.level_size(h - 1);
    const std::vector<Configuration> pool = enumerate_admissible_configs(dict, h);
    const std::int64_t npool = static_cast<std::int64_t>(pool.size());
    if (npool < C_r)
      throw UnrealizableRegime("only " + std::to_string(npool) +
                               " admissible configurations at level " + std::to_string(h) +
                               ", need C_r=" + std::to_string(C_r));

    // The partition wiring gives every part its own children, so parts are
    // distinct no matter which configuration subsets they draw; only the
    // free-wiring regimes can exhaust the composition space.
    if (regime.kind != RegimeKind::ExponentialDecrease) {
      std::int64_t tuples = 1;
      for (int i = 0; i < r; ++i) tuples = saturating_mul(tuples, below);
      const std::int64_t capacity = saturating_mul(tuples, choose_sat(npool, C_r));
      if (want > capacity)
        throw UnrealizableRegime("level " + std::to_string(h) + " wants " +
                                 std::to_string(want) + " distinct parts, only " +
                                 std::to_string(capacity) + " compositions exist");
    }

    std::set<std::pair<std::vector<int>, std::vector<std::int64_t>>> used;
    for (std::int64_t j = 0; j < want; ++j) {
      std::vector<int> children(static_cast<std::size_t>(r));
      std::vector<std::int64_t> cfg_idx;
      for (;;) {
        if (regime.kind == RegimeKind::ExponentialDecrease) {
          for (int i = 0; i < r; ++i)
            children[static_cast<std::size_t>(i)] = static_cast<int>(j) * r + i;
        } else {
          for (int i = 0; i < r; ++i)
            children[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.next_below(static_cast<std::uint64_t>(below)));
        }
        cfg_idx = rng.sample_without_replacement(npool, C_r);
        std::sort(cfg_idx.begin(), cfg_idx.end());
        if (used.insert({children, cfg_idx}).second) break;
      }
      std::vector<Configuration> configs;
      configs.reserve(static_cast<std::size_t>(C_r));
      const std::vector<double> probs = config_probs(rng, C_r, opts.uniform_config_probs);
      for (int c = 0; c < C_r; ++c) {
        Configuration cfg = pool[static_cast<std::size_t>(cfg_idx[static_cast<std::size_t>(c)])];
        cfg.log_prob = std::log(probs[static_cast<std::size_t>(c)]);
        configs.push_back(std::move(cfg));
      }
      dict.compose(h, children, std::move(configs));
    }
  }
  dict.validate();
  return dict;
}

}  // namespace partshare
