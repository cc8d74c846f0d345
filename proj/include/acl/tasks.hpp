#pragma once

#include "acl/mixture.hpp"
#include "acl/schedule.hpp"
#include "acl/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace acl {

enum class TaskKind { gaussian, gmm_prior, gmm_likelihood };

std::string_view to_string(TaskKind k);
TaskKind task_kind_from_string(std::string_view s);

/// One term of the likelihood mixture x | theta ~ sum_c weight_c N(theta, cov_c).
struct LikelihoodComponent {
  double weight = 1.0;
  Matrix cov;
};

/// Prior, likelihood and observations of one analytic inference problem.
/// Immutable once built; all score evaluation is const.
struct Task {
  TaskKind kind = TaskKind::gaussian;
  Index dim = 0;
  GaussianMixture prior;
  std::vector<LikelihoodComponent> likelihood;
  std::vector<Vector> observations;
  Vector theta_true;  // parameter the observations were simulated from
  Matrix base_cov;    // likelihood Sigma (scaled per component for gmm_likelihood)

  Index n() const { return static_cast<Index>(observations.size()); }
  void validate() const;
};

/// Generator settings for the three task families. Defaults follow the
/// configurations used in the experiments (mu_1 = (0,0), mu_2 = (1,1) for the
/// GMM prior; 1/9 and 2.25 scalings of a diagonal 0.6..1.4 Sigma for the GMM
/// likelihood).
struct TaskParams {
  TaskKind kind = TaskKind::gaussian;
  Index dim = 2;
  // Likelihood covariance for gaussian / gmm_prior: eigenvalues log-uniform in
  // [lo, hi] with a uniformly random rotation.
  double lik_eig_lo = 0.6;
  double lik_eig_hi = 1.4;
  bool lik_random_rotation = true;
  // gmm_prior
  std::vector<Vector> prior_means;     // empty -> (0,..,0), (1,..,1)
  std::vector<double> prior_scales{0.5, 0.5};
  std::vector<double> prior_weights{0.5, 0.5};
  // gmm_likelihood
  double gmm_lik_diag_lo = 0.6;
  double gmm_lik_diag_hi = 1.4;
  std::vector<double> gmm_lik_factors{1.0 / 9.0, 2.25};
  std::vector<double> gmm_lik_weights{0.5, 0.5};
  // exact posterior enumeration
  std::size_t component_cap = 4096;

  void validate() const;
};

/// Draws the likelihood matrix (where random), theta* from the prior and n
/// observations from the likelihood, all from `data_seed`.
Task make_task(const TaskParams& params, Index n, std::uint64_t data_seed);

/// Same task restricted to its first n observations.
Task with_first_observations(const Task& task, Index n);

/// SPD matrix with eigenvalues log-uniform in [lo, hi] and, optionally, a
/// Haar-random rotation.
Matrix random_spd(Index dim, double lo, double hi, bool rotate, std::uint64_t seed);

Vector prior_score(const Task& task, const Schedule& s, const Vector& theta, double t);

/// Exact p(theta | x_i) (0-based i) as a Gaussian mixture.
GaussianMixture individual_posterior(const Task& task, Index i);

Vector individual_posterior_score(const Task& task, const Schedule& s, Index i, const Vector& theta, double t);

struct PosteriorMoments {
  Vector mean;
  Matrix cov;
  GaussianMixture mixture;
};

/// Moments of p(theta | x_i) when `i` is set, else of p(theta | x_{1:n})
/// (gaussian kind only; UnsupportedError otherwise).
PosteriorMoments posterior_moments(const Task& task, std::optional<Index> i);

/// p(theta | x_{1:n}) by exact enumeration of prior x likelihood component
/// assignments. Throws std::length_error when the component count exceeds cap.
GaussianMixture joint_posterior(const Task& task, std::size_t cap);

/// i.i.d. draws from p(theta | x_{1:n}).
SampleSet exact_posterior_sample(const Task& task, Index count, std::uint64_t seed, std::size_t cap = 4096);

/// i.i.d. draws from any Gaussian mixture, keyed by (seed, stream).
PointMatrix sample_mixture(const GaussianMixture& mix, Index count, std::uint64_t seed, std::uint64_t stream);

}  // namespace acl
