#pragma once

#include "acl/score_field.hpp"
#include "acl/tuner.hpp"
#include "acl/types.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>

namespace acl {

/// A chain diverged or the score returned a non-finite value.
class SamplerError : public std::runtime_error {
 public:
  SamplerError(const std::string& what, int level, long long step)
      : std::runtime_error(what + " (level " + std::to_string(level) + ", step " + std::to_string(step) + ")"),
        level_(level),
        step_(step) {}
  int level() const noexcept { return level_; }
  long long step() const noexcept { return step_; }

 private:
  int level_;
  long long step_;
};

struct SamplerOptions {
  int workers = 1;
  Index chunk = 64;  // chains per work item; fixed so results do not depend on workers
  double divergence_limit = 1e6;
};

/// k ULA steps theta += h s(theta, t) + sqrt(2h) z on every chain of `start`.
/// The noise of chain j at step i is keyed by (seed, level, j, i).
SampleSet ula_chain(const ScoreField& score, const SampleSet& start, double h, long long k, double t,
                    std::uint64_t seed, int level = 0, const SamplerOptions& opts = {});

using ScoreFactory = std::function<ScoreFieldPtr(int level, double t)>;

/// count standard Gaussian chains at t_T, pushed through the plan's levels
/// from p = T-1 down to 0.
SampleSet annealed_sample(const LevelPlan& plan, const ScoreFactory& factory, Index count, std::uint64_t seed,
                          const SamplerOptions& opts = {});
SampleSet annealed_sample(const LevelPlan& plan, ScoreFieldPtr composite, Index count, std::uint64_t seed,
                          const SamplerOptions& opts = {});

/// Standard normal starting points, keyed by (seed, chain).
SampleSet gaussian_start(Index count, Index dim, std::uint64_t seed, double level = 1.0);

}  // namespace acl
