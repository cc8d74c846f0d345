#pragma once

#include "acl/schedule.hpp"
#include "acl/score_field.hpp"
#include "acl/types.hpp"

#include <vector>

namespace acl {

/// How a base covariance C becomes the time-t covariance weight of Linhart's
/// composite score.
///  - backward_kernel: (C^-1 + alpha_t/v_t I)^-1, the covariance of theta_0
///    given theta_t. With these weights the composite is exact on Gaussians.
///  - diffused_marginal: alpha_t C + v_t I.
enum class ProxyRule { backward_kernel, diffused_marginal };

struct CompositeSpec {
  Method method = Method::geffner;
  Index n = 0;
  std::vector<Matrix> post_base;  // covariance of p(theta | x_i) (or its proxy)
  Matrix prior_base;              // covariance of the prior (or its proxy)
  Schedule schedule;
  ProxyRule rule = ProxyRule::backward_kernel;

  Index dim() const { return prior_base.rows(); }
  void validate() const;

  /// Sigma_{t,i} and Sigma_{t,lambda}.
  Matrix post_proxy(Index i, double t) const;
  Matrix prior_proxy(double t) const;
  /// Their inverses, computed without inverting twice.
  Matrix post_precision(Index i, double t) const;
  Matrix prior_precision(double t) const;
};

/// alpha_t S0 + v_t I
Matrix diffuse_covariance(const Matrix& s0, double t, const Schedule& s);
/// (S0^-1 + alpha_t / v_t I)^-1; t must be positive.
Matrix backward_covariance(const Matrix& s0, double t, const Schedule& s);

/// Lambda_t = sum_i Sigma_{t,i}^-1 + (1 - n) Sigma_{t,lambda}^-1.
/// Throws TuningError when it is not SPD.
Matrix lambda_matrix(const CompositeSpec& spec, double t);

/// Per-field matrix weights of the Linhart score at t: out[i] = Lambda^-1 Sigma_{t,i}^-1
/// for i < n and out[n] = (1 - n) Lambda^-1 Sigma_{t,lambda}^-1.
std::vector<Matrix> linhart_weights(const CompositeSpec& spec, double t);

Vector geffner_score(const CompositeSpec& spec, const ScoreField& prior, const std::vector<ScoreFieldPtr>& posts,
                     const Vector& theta, double t);
Vector linhart_score(const CompositeSpec& spec, const ScoreField& prior, const std::vector<ScoreFieldPtr>& posts,
                     const Vector& theta, double t);

/// (n - 1) eps_prior + n eps_post, for either method.
double compose_dsm_error(double eps_prior, double eps_post, Index n, Method method);

/// Batched composite score; affine whenever every input field is.
class CompositeScoreField final : public ScoreField {
 public:
  CompositeScoreField(CompositeSpec spec, ScoreFieldPtr prior, std::vector<ScoreFieldPtr> posts);

  Index dim() const override { return prior_->dim(); }
  void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const override;
  std::optional<Affine> affine_at(double t) const override;

  const CompositeSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const std::vector<Matrix>> weights(double t) const;

  CompositeSpec spec_;
  ScoreFieldPtr prior_;
  std::vector<ScoreFieldPtr> posts_;
  TimeCache<std::vector<Matrix>> weight_cache_;
  TimeCache<std::optional<Affine>> affine_cache_;
};

/// Spec with exact analytic covariances of the task's prior and individual posteriors.
CompositeSpec make_spec(const Task& task, Method method, const Schedule& s, ProxyRule rule = ProxyRule::backward_kernel);

/// Composite field from the task's exact analytic individual scores.
std::shared_ptr<const CompositeScoreField> make_composite(const Task& task, Method method, const Schedule& s,
                                                          ProxyRule rule = ProxyRule::backward_kernel);

}  // namespace acl
