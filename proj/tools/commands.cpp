#include "commands.hpp"

#include <filesystem>
#include <ostream>

#include "partshare/complexity.hpp"
#include "partshare/errors.hpp"
#include "partshare/generative.hpp"
#include "partshare/inference.hpp"
#include "partshare/io.hpp"
#include "partshare/oracle.hpp"
#include "partshare/verify.hpp"

namespace partshare::tools {
namespace {

namespace fs = std::filesystem;

const ExperimentConfig::LatticeSpec& lattice_spec(const ExperimentConfig& cfg) {
  if (!cfg.lattice) throw ConfigError("missing [lattice] section");
  return *cfg.lattice;
}

LatticeHierarchy lattice_of(const ExperimentConfig& cfg) {
  const auto& spec = lattice_spec(cfg);
  const Extent base = spec.kind == GridKind::OneD ? Extent::line(spec.cols)
                                                  : Extent::grid(spec.rows, spec.cols);
  return LatticeHierarchy::build(base, spec.scale, spec.levels);
}

RegimeSpec regime_spec(const ExperimentConfig& cfg) {
  if (!cfg.regime)
    throw ConfigError("missing 'regime' (or 'file') under [dictionary]");
  switch (*cfg.regime) {
    case RegimeKind::ExponentialGrowth: return RegimeSpec::growth(cfg.growth_constant);
    case RegimeKind::UserSupplied:
      if (cfg.sizes.empty())
        throw ConfigError("regime 'user' needs 'sizes' under [dictionary]");
      return RegimeSpec::user(cfg.sizes);
    case RegimeKind::ExponentialDecrease: return RegimeSpec::decrease();
  }
  throw ConfigError("unreachable regime kind");
}

/// Loads the configured dictionary file, or draws one from the regime spec.
HierarchicalDictionary dictionary_of(const ExperimentConfig& cfg,
                                     const LatticeHierarchy& lat) {
  if (cfg.dictionary_file) {
    HierarchicalDictionary dict = io::load_dictionary(*cfg.dictionary_file);
    if (dict.kind() != lat.kind() || dict.axis_stride() != lat.axis_stride() ||
        dict.levels() != lat.levels())
      throw ParamMismatch("dictionary file " + *cfg.dictionary_file +
                          " does not fit the configured lattice");
    return dict;
  }
  return build_regime_dictionary(regime_spec(cfg), lat.kind(), lat.axis_stride(),
                                 lat.levels(), cfg.fan_out, cfg.configs_per_part,
                                 cfg.dict_seed, cfg.dict_opts);
}

std::string ensure_out_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create output dir " + cfg.out_dir + ": " + ec.message());
  return cfg.out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

int cmd_build(const ExperimentConfig& cfg, std::ostream& out) {
  const LatticeHierarchy lat = lattice_of(cfg);
  const HierarchicalDictionary dict = dictionary_of(cfg, lat);
  const std::string path = join(ensure_out_dir(cfg), "dictionary.txt");
  io::save_dictionary(dict, path);
  out << "wrote " << path << "\n";
  out << "level sizes:";
  for (int h = 0; h <= dict.levels(); ++h) out << " " << dict.level_size(h);
  out << "\n";
  return 0;
}

int cmd_sample(const ExperimentConfig& cfg, std::ostream& out) {
  const LatticeHierarchy lat = lattice_of(cfg);
  const HierarchicalDictionary dict = dictionary_of(cfg, lat);
  const Scene scene = sample_scene(dict, lat, cfg.objects, cfg.scene_seed, cfg.noise);
  const std::string dir = ensure_out_dir(cfg);
  const std::string image_path = join(dir, "image.txt");
  const std::string scene_path = join(dir, "scene.txt");
  io::save_image(scene.image, image_path);
  io::save_scene_sidecar(scene, scene_path);
  out << "wrote " << image_path << " and " << scene_path << "\n";
  out << "objects: " << scene.objects.size() << "\n";
  for (const ParseTree& parse : scene.objects)
    out << "  type " << parse.object_type() << " at root cell " << parse.root().cell << "\n";
  if (cfg.noise == 0.0)
    out << "scene log-likelihood ratio: "
        << io::fmt_g17(scene_log_likelihood_ratio(scene, dict, lat)) << "\n";
  return 0;
}

int cmd_detect(const ExperimentConfig& cfg, std::ostream& out) {
  const LatticeHierarchy lat = lattice_of(cfg);
  const HierarchicalDictionary dict = dictionary_of(cfg, lat);
  if (!cfg.image_file) throw ConfigError("missing 'image' under [scene]");
  const FeatureImage image = io::load_image(*cfg.image_file);
  const DetectResult result = detect_all(image, dict, lat, cfg.threshold, cfg.mode);

  const std::string dir = ensure_out_dir(cfg);
  io::save_detections_csv(result.detections, join(dir, "detections.csv"));
  io::save_detection_parses(result.detections, join(dir, "parses.txt"));
  io::save_counter_envelope(
      CounterEnvelope{ComplexityParams::of(dict, lat), cfg.mode, result.counter},
      join(dir, "counters.json"));
  if (result.schedule) io::save_schedule(*result.schedule, join(dir, "schedule.json"));

  out << result.detections.size() << " detections (mode " << detect_mode_name(cfg.mode)
      << ", threshold " << io::fmt_g17(cfg.threshold) << ")\n";
  for (const Detection& d : result.detections)
    out << "  cell " << d.root_cell << " type " << d.type_ordinal << " score "
        << io::fmt_g17(d.score) << "\n";
  return 0;
}

int cmd_complexity(const ExperimentConfig& cfg, std::ostream& out) {
  const auto& spec = lattice_spec(cfg);
  ComplexityParams params;
  RegimeKind regime = cfg.regime.value_or(RegimeKind::UserSupplied);
  if (cfg.dictionary_file) {
    const LatticeHierarchy lat = lattice_of(cfg);
    const HierarchicalDictionary dict = dictionary_of(cfg, lat);
    params = ComplexityParams::of(dict, lat);
  } else {
    params.base_cells = spec.kind == GridKind::OneD ? spec.cols : spec.rows * spec.cols;
    params.q = spec.scale;
    params.levels_H = spec.levels;
    params.fan_out_r = cfg.fan_out;
    params.configs_per_part = cfg.configs_per_part;
    params.level_sizes =
        regime_spec(cfg).level_sizes(spec.levels, cfg.fan_out, spec.scale);
    regime = *cfg.regime;
  }

  const RegimeReport report = regime_report(regime, params);
  const std::string dir = ensure_out_dir(cfg);
  io::save_regime_curve(report, join(dir, "regime_curve.csv"));
  out << "wrote " << join(dir, "regime_curve.csv") << "\n";
  out << "shared total " << report.shared_total.str() << ", unshared total "
      << report.unshared_total.str() << ", neurons " << report.neuron_total.str()
      << ", parallel depth " << report.parallel_depth << "\n";
  for (const auto& verdict : report.verdicts)
    out << "verdict " << verdict.name << ": " << (verdict.holds ? "holds" : "FAILS") << " ("
        << verdict.detail << ")\n";

  if (cfg.counters_file) {
    const CounterEnvelope env = io::load_counter_envelope(*cfg.counters_file);
    const ReconcileReport rec = reconcile(params, env);
    io::save_reconcile(rec, join(dir, "reconcile.csv"));
    out << "wrote " << join(dir, "reconcile.csv") << "\n";
    out << "reconciliation " << (rec.all_exact ? "exact" : "NOT exact") << "\n";
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.verify.num_instances == 0) {
    out << "warning: 0 instances requested; nothing verified (vacuous pass)\n";
    return 0;
  }
  const SweepResult result = run_verification_sweep(cfg.verify);
  out << "verified " << result.instances << " instances (seeds " << cfg.verify.base_seed
      << ".." << cfg.verify.base_seed + static_cast<std::uint64_t>(result.instances) - 1
      << ")\n";
  for (const auto& [check, passed] : result.checks_passed)
    out << "  " << check << ": " << passed << " passed\n";
  if (!result.ok()) {
    out << result.failures.size() << " failures:\n";
    for (const VerifyFailure& f : result.failures)
      out << "  seed " << f.seed << " " << f.check << ": " << f.detail << "\n";
    return 1;
  }
  out << "all checks passed\n";
  return 0;
}

int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "build") return cmd_build(cfg, out);
    if (name == "sample") return cmd_sample(cfg, out);
    if (name == "detect") return cmd_detect(cfg, out);
    if (name == "complexity") return cmd_complexity(cfg, out);
    if (name == "verify") return cmd_verify(cfg, out);
    err << "unknown command '" << name << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParamMismatch& e) {
    err << "parameter mismatch: " << e.what() << "\n";
    return 4;
  } catch (const GenerativeError& e) {
    err << "generative failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace partshare::tools
