#pragma once

#include "acl/schedule.hpp"
#include "acl/tasks.hpp"
#include "acl/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace acl {

struct TuningConfig {
  double gamma = 0.5;
  double omega = 0.5;
  double eps_dsm = 0.0;  // composed L2 bound on the composite score error
  int T = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// omega used by the experiments: 0.5 below d = 10, 0.8 from d = 10 on.
double default_omega(Index dim);

struct LevelRecord {
  double t = 0.0;
  double h = 0.0;
  long long k = 0;
  double m = 0.0;
  double M = 0.0;
  double w2_next = 0.0;  // W2(pi_{t_{p+1}}, pi_{t_p})
  double B = 0.0;
};

/// levels[p] describes level t_p, p = 0..T-1 (ascending t). Sampling visits
/// them from p = T-1 down to 0.
struct LevelPlan {
  Method method = Method::geffner;
  Index dim = 0;
  TuningConfig config;
  bool proxy = false;  // constants and distances come from Gaussian proxies
  double t_end = 1.0;  // t_T, where sampling starts from N(0, I)
  std::vector<LevelRecord> levels;

  int size() const { return static_cast<int>(levels.size()); }
  long long total_steps() const;
};

/// Largest admissible step, strictly below 2 / (m + M), such that the bias
/// term stays within omega * gamma.
double choose_step(double m, double M, const TuningConfig& cfg, Index d);

/// Smallest k >= 1 with (1 - m h)^k (gamma + w2_next) <= (1 - omega) gamma.
long long choose_steps(double m, double h, double w2_next, const TuningConfig& cfg);

/// 1.65 (M / m) sqrt(h d) + eps / m
double bias_term(double m, double M, double h, Index d, double eps);

/// Accumulated bound sum_p prod_{s<=p} c_s w_p + prod_{s<p} c_s B_p with c_s = (1 - m_s h_s)^k_s,
/// evaluated in nested form.
double global_bound(const LevelPlan& plan);

/// Moment-matched Gaussian of p(theta | x_i), or of the prior when i is empty.
GaussianDist gaussian_proxy(const Task& task, std::optional<Index> i);

/// Gaussian with precision (1 - n) P_lambda + sum_i P_i.
GaussianDist proxy_compose(const GaussianDist& prior, const std::vector<GaussianDist>& posts);

/// Bridging densities at every grid time (exact for the gaussian task,
/// proxy-based otherwise).
std::vector<GaussianDist> plan_bridges(const Task& task, Method method, const LevelGrid& grid, const Schedule& s);

/// Decision rule applied to given bridging densities at grid times.
LevelPlan plan_from_bridges(const std::vector<GaussianDist>& bridges, const LevelGrid& grid, Method method,
                            const TuningConfig& cfg);

LevelPlan plan(const Task& task, Method method, const TuningConfig& cfg, const Schedule& s);

}  // namespace acl
