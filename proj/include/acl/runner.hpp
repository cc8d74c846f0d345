#pragma once

#include "acl/config.hpp"
#include "acl/metrics.hpp"
#include "acl/sampler.hpp"
#include "acl/tuner.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace acl {

/// Outcome of tuning (and optionally sampling) one (n, method, seed) cell.
struct CellResult {
  Index n = 0;
  Method method = Method::geffner;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int failed_level = -1;
  std::optional<LevelPlan> plan;
  long long total_steps = 0;
  double global_bound = 0.0;
  std::optional<W2Report> w2;
  double seconds = 0.0;
};

TuningConfig tuning_config(const RunConfig& cfg, Index n, std::uint64_t seed);

/// Task for a run seed with the first n observations.
Task build_task(const RunConfig& cfg, Index n, std::uint64_t run_seed);

/// Seed of the exact reference draws used to score a run.
std::uint64_t reference_seed(std::uint64_t run_seed);

/// Tune, then (if `sample`) run the annealed sampler and compare against
/// exact posterior draws. Failures are captured in the result.
CellResult run_cell(const RunConfig& cfg, const Task& task, Method method, std::uint64_t seed, bool sample,
                    int workers, SampleSet* samples_out = nullptr);

nlohmann::json plan_to_json(const LevelPlan& plan);
nlohmann::json cell_to_json(const CellResult& r);

/// CLI commands; each writes its files under cfg.out_dir and returns the
/// process exit code (0 iff every requested cell succeeded).
int cmd_tune(const RunConfig& cfg);
int cmd_sample(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);

}  // namespace acl
