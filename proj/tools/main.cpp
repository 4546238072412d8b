#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "partshare/errors.hpp"
#include "partshare/inference.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "experiment config file")->required();
  sub->add_option("--mode", args.mode,
                  "inference mode: serial-shared|serial-unshared|parallel-sim");
  sub->add_option("--seed", args.seed, "override the command's seed");
  sub->add_option("--out", args.out_dir, "override the output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical part-sharing models: build, sample, detect, measure"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* names[] = {"build", "sample", "detect", "complexity", "verify"};
  const char* blurbs[] = {
      "draw a dictionary from a regime spec and write it out",
      "sample a scene (image + parse sidecar) from a dictionary",
      "run detection over an image and write detections/counters",
      "emit predicted cost tables and reconcile measured counters",
      "run the randomized oracle-vs-DP verification sweep",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], blurbs[i]), args);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  partshare::tools::ExperimentConfig cfg;
  try {
    cfg = partshare::tools::ExperimentConfig::load(args.config_path);
    if (args.mode) cfg.mode = partshare::detect_mode_from_name(*args.mode);
    if (args.seed) {
      const auto s = static_cast<std::uint64_t>(*args.seed);
      cfg.dict_seed = s;
      cfg.scene_seed = s;
      cfg.verify.base_seed = s;
    }
    if (args.out_dir) cfg.out_dir = *args.out_dir;
  } catch (const partshare::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  return partshare::tools::run_command(command, cfg, std::cout, std::cerr);
}
