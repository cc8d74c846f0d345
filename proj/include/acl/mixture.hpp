#pragma once

#include "acl/schedule.hpp"
#include "acl/types.hpp"

#include <vector>

namespace acl {

/// Finite Gaussian mixture with log-space weights. Every density the library
/// handles analytically (priors, individual and joint posteriors, their VP
/// diffusions) is one of these; a single component is a plain Gaussian.
class GaussianMixture {
 public:
  struct Component {
    double log_weight = 0.0;  // normalized on construction
    Vector mean;
    Matrix cov;
  };

  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<Component> components);
  static GaussianMixture single(const GaussianDist& g);

  Index dim() const { return dim_; }
  std::size_t size() const { return comps_.size(); }
  const std::vector<Component>& components() const { return comps_; }
  std::vector<double> weights() const;

  /// Law of theta_t = sqrt(alpha_t) theta_0 + sqrt(v_t) z for theta_0 ~ this.
  GaussianMixture diffused(const Schedule& s, double t) const;

  double log_pdf(const Vector& theta) const;
  Vector score(const Vector& theta) const;
  /// Column-wise score of a dim x N batch.
  void score_batch(const Eigen::Ref<const Matrix>& thetas, Eigen::Ref<Matrix> out) const;
  /// Posterior component probabilities at theta (sums to one).
  Vector responsibilities(const Vector& theta) const;

  /// Moment-matched Gaussian (exact mean and covariance of the mixture).
  GaussianDist moments() const;

 private:
  struct Factor {
    Eigen::LLT<Matrix> llt;
    double log_norm = 0.0;  // log weight - log det(cov)/2 - d log(2 pi)/2
  };

  Index dim_ = 0;
  std::vector<Component> comps_;
  std::vector<Factor> factors_;
};

/// log(sum(exp(x))) without overflow.
double log_sum_exp(const Eigen::Ref<const Vector>& x);

}  // namespace acl
