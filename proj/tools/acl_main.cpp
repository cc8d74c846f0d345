#include "acl/config.hpp"
#include "acl/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Annealed Langevin sampling of multi-observation posteriors with auto-tuned step sizes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string method;
  std::optional<int> workers;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "run seed (overrides sampling.seed and sampling.seeds)");
    sub->add_option("--method", method, "geffner, linhart or both")->check(CLI::IsMember({"geffner", "linhart", "both"}));
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* tune = app.add_subcommand("tune", "tune per-level step sizes and counts");
  auto* sample = app.add_subcommand("sample", "tune, sample and score against exact posterior draws");
  auto* sweep = app.add_subcommand("sweep", "tune and sample over the n list and seeds");
  for (auto* s : {tune, sample, sweep}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    acl::RunConfig cfg = acl::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) {
      cfg.seed = *seed;
      cfg.seeds = {*seed};
    }
    if (!method.empty()) cfg.methods = acl::methods_from_string(method);
    if (workers) cfg.workers = *workers;
    cfg.validate();

    if (tune->parsed()) return acl::cmd_tune(cfg);
    if (sample->parsed()) return acl::cmd_sample(cfg);
    return acl::cmd_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
