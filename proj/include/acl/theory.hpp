#pragma once

#include "acl/composite.hpp"
#include "acl/schedule.hpp"
#include "acl/tasks.hpp"
#include "acl/types.hpp"

#include <utility>
#include <vector>

namespace acl {

/// Two-sided Hessian bounds m I <= -grad^2 log pi <= M I at time t.
struct BridgingConstants {
  double t = 0.0;
  double m = 0.0;
  double M = 0.0;
  Method method = Method::geffner;
  bool log_concave = false;  // m > 0
};

/// Exact (mu_t, Sigma_t) of the bridging density of a gaussian task.
GaussianDist bridging_moments(const Task& task, Method method, double t, const Schedule& s);

/// Bridging density built from Gaussian prior and individual posterior
/// proxies: for linhart the diffused composed posterior, for geffner the
/// normalized lambda_t^(1-n) prod_i p_t(. | x_i). Throws TuningError if the
/// result is not a proper Gaussian.
GaussianDist bridging_from_proxies(const GaussianDist& prior, const std::vector<GaussianDist>& posts, Method method,
                                   double t, const Schedule& s);

/// Lemma 2 constants from the extreme eigenvalues of the likelihood covariance.
BridgingConstants gaussian_constants(double sigma_min, double sigma_max, Index n, double t, Method method, const Schedule& s);
/// Same, parameterized directly by v_t.
BridgingConstants gaussian_constants_v(double sigma_min, double sigma_max, Index n, double v_t, Method method);

/// M^G - M^L at sigma_min (or m^G - m^L at sigma_max).
double constant_gap(double sigma, Index n, double t, const Schedule& s);
double constant_gap_v(double sigma, Index n, double v_t);

enum class W2Path { automatic, bures, commuting };

/// 2-Wasserstein distance between Gaussians.
double gaussian_w2(const GaussianDist& a, const GaussianDist& b, W2Path path = W2Path::automatic);

/// (lower, upper) Hessian bounds of a diffused L-log-Lipschitz density.
std::pair<double, double> propagate_smoothness(double L, double t, const Schedule& s);
std::pair<double, double> propagate_smoothness_alpha(double L, double alpha_t);

/// Bounds on the composite bridging density from per-field (m, M) bounds.
/// For linhart the eigenvalues of the spec's proxies and Lambda at t enter as
/// weights. log_concave reports whether the lower bound is positive.
BridgingConstants composite_smoothness(const std::vector<std::pair<double, double>>& post_bounds,
                                       std::pair<double, double> prior_bounds, const CompositeSpec& proxies,
                                       Method method, double t);

/// Extreme eigenvalues of the precision of a Gaussian, i.e. its (m, M).
std::pair<double, double> precision_extremes(const GaussianDist& g);

}  // namespace acl
