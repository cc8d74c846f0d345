#pragma once

#include "acl/schedule.hpp"
#include "acl/tasks.hpp"
#include "acl/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acl {

inline constexpr int kSchemaVersion = 1;

/// Everything a CLI run needs. Missing JSON fields take these defaults.
struct RunConfig {
  int schema_version = kSchemaVersion;

  TaskParams task;
  std::vector<Index> n_list{10};
  std::optional<std::uint64_t> data_seed;  // unset: data drawn from the run seed

  std::vector<Method> methods{Method::geffner, Method::linhart};

  double gamma = 0.5;
  std::optional<double> omega;  // unset: 0.5, or 0.8 when dim >= 10
  double eps_dsm_prior = 0.0;
  double eps_dsm_post = 0.0;
  int T = 10;

  Schedule schedule;

  Index chains = 3000;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds{0};
  Index reference_samples = 3000;
  Index w2_cap = 1024;
  bool sweep_sample = true;  // sweep also runs the sampler (otherwise tuning only)

  std::string out_dir = "out";
  bool dump_samples = true;
  int workers = 1;

  double resolved_omega() const;
  std::uint64_t data_seed_for(std::uint64_t run_seed) const { return data_seed.value_or(run_seed); }

  /// Checks every field against the preconditions of the modules it feeds.
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
/// Fully resolved config, defaults materialized.
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

std::vector<Method> methods_from_string(std::string_view s);

}  // namespace acl
