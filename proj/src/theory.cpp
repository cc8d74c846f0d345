#include "acl/theory.hpp"

#include "acl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acl {

GaussianDist bridging_from_proxies(const GaussianDist& prior, const std::vector<GaussianDist>& posts, Method method,
                                   double t, const Schedule& s) {
  if (posts.empty()) throw std::invalid_argument("bridging density needs at least one posterior");
  const Index d = prior.dim();
  const double n = static_cast<double>(posts.size());
  const double a = alpha(s, t);
  const double ra = std::sqrt(a);
  const double var = v(s, t);

  auto diffuse = [&](const Matrix& c) {
    Matrix out = a * c;
    out.diagonal().array() += var;
    return out;
  };

  Matrix prec;
  Vector h;
  if (method == Method::linhart) {
    // compose at t = 0, then diffuse
    prec = (1.0 - n) * linalg::spd_inverse(prior.cov, "prior proxy covariance");
    h = prec * prior.mean;
    for (const auto& p : posts) {
      if (p.dim() != d) throw std::invalid_argument("proxy dimension mismatch");
      const Matrix pi = linalg::spd_inverse(p.cov, "posterior proxy covariance");
      prec += pi;
      h += pi * p.mean;
    }
    Eigen::LLT<Matrix> llt(linalg::symmetrize(prec));
    if (llt.info() != Eigen::Success) throw TuningError("composed proxy precision is not positive definite");
    const Matrix cov0 = linalg::symmetrize(llt.solve(Matrix::Identity(d, d)));
    return {ra * (cov0 * h), linalg::symmetrize(diffuse(cov0))};
  }

  prec = (1.0 - n) * linalg::spd_inverse(diffuse(prior.cov), "diffused prior covariance");
  h = prec * (ra * prior.mean);
  for (const auto& p : posts) {
    if (p.dim() != d) throw std::invalid_argument("proxy dimension mismatch");
    const Matrix pi = linalg::spd_inverse(diffuse(p.cov), "diffused posterior covariance");
    prec += pi;
    h += pi * (ra * p.mean);
  }
  Eigen::LLT<Matrix> llt(linalg::symmetrize(prec));
  if (llt.info() != Eigen::Success) {
    throw TuningError("geffner bridging precision is not positive definite at t = " + std::to_string(t));
  }
  const Matrix cov = linalg::symmetrize(llt.solve(Matrix::Identity(d, d)));
  return {cov * h, cov};
}

GaussianDist bridging_moments(const Task& task, Method method, double t, const Schedule& s) {
  if (task.kind != TaskKind::gaussian) throw UnsupportedError("closed-form bridging moments need the gaussian task");
  if (task.n() < 1) throw std::invalid_argument("bridging moments need at least one observation");
  const GaussianDist prior{Vector::Zero(task.dim), Matrix::Identity(task.dim, task.dim)};
  std::vector<GaussianDist> posts;
  for (Index i = 0; i < task.n(); ++i) {
    auto pm = posterior_moments(task, i);
    posts.push_back({std::move(pm.mean), std::move(pm.cov)});
  }
  return bridging_from_proxies(prior, posts, method, t, s);
}

BridgingConstants gaussian_constants_v(double sigma_min, double sigma_max, Index n, double v_t, Method method) {
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) throw std::invalid_argument("need 0 < sigma_min <= sigma_max");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double nn = static_cast<double>(n);
  BridgingConstants c;
  c.method = method;
  if (method == Method::linhart) {
    c.M = (nn + sigma_min) / (sigma_min + nn * v_t);
    c.m = (nn + sigma_max) / (sigma_max + nn * v_t);
  } else {
    c.M = (nn + sigma_min + v_t - nn * v_t) / (sigma_min + v_t);
    c.m = (nn + sigma_max + v_t - nn * v_t) / (sigma_max + v_t);
  }
  c.log_concave = c.m > 0.0;
  return c;
}

BridgingConstants gaussian_constants(double sigma_min, double sigma_max, Index n, double t, Method method, const Schedule& s) {
  auto c = gaussian_constants_v(sigma_min, sigma_max, n, v(s, t), method);
  c.t = t;
  return c;
}

double constant_gap_v(double sigma, Index n, double v_t) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double nn = static_cast<double>(n);
  const double a = 1.0 - v_t;
  return nn * (nn - 1.0) * a * v_t / ((sigma + v_t) * (sigma + nn * v_t));
}

double constant_gap(double sigma, Index n, double t, const Schedule& s) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double nn = static_cast<double>(n);
  const double var = v(s, t);
  return nn * (nn - 1.0) * alpha(s, t) * var / ((sigma + var) * (sigma + nn * var));
}

double gaussian_w2(const GaussianDist& a, const GaussianDist& b, W2Path path) {
  if (a.dim() != b.dim() || a.cov.rows() != a.dim() || b.cov.rows() != b.dim()) {
    throw std::invalid_argument("gaussian_w2 dimension mismatch");
  }
  const double mean_sq = (a.mean - b.mean).squaredNorm();
  if (path == W2Path::automatic) {
    const double comm = (a.cov * b.cov - b.cov * a.cov).norm();
    path = comm < 1e-10 ? W2Path::commuting : W2Path::bures;
  }
  double cov_sq;
  if (path == W2Path::commuting) {
    cov_sq = (linalg::sym_sqrt(a.cov) - linalg::sym_sqrt(b.cov)).squaredNorm();
  } else {
    const Matrix ra = linalg::sym_sqrt(a.cov);
    const Matrix cross = linalg::sym_sqrt(ra * b.cov * ra);
    cov_sq = a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
  }
  return std::sqrt(std::max(0.0, mean_sq + cov_sq));
}

std::pair<double, double> propagate_smoothness_alpha(double L, double a) {
  if (!(L >= 0.0)) throw std::invalid_argument("Lipschitz constant must be nonnegative");
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error("smoothness propagation needs 0 < alpha_t < 1 (t > 0)");
  const double r = 5.0 * L * std::pow(a, 1.5) * (L + 1.0 / std::sqrt(0.5 * std::log(1.0 / a)));
  return {1.0 - r, r + L * L * a + 1.0};
}

std::pair<double, double> propagate_smoothness(double L, double t, const Schedule& s) {
  if (!(t > 0.0)) throw std::domain_error("smoothness propagation needs t > 0");
  return propagate_smoothness_alpha(L, alpha(s, t));
}

BridgingConstants composite_smoothness(const std::vector<std::pair<double, double>>& post_bounds,
                                       std::pair<double, double> prior_bounds, const CompositeSpec& proxies,
                                       Method method, double t) {
  if (post_bounds.empty()) throw std::invalid_argument("need bounds for at least one posterior");
  const double n = static_cast<double>(post_bounds.size());
  auto lip = [](std::pair<double, double> b) { return std::max(std::abs(b.first), std::abs(b.second)); };
  const auto [m_lam, M_lam] = prior_bounds;
  BridgingConstants out;
  out.t = t;
  out.method = method;

  if (method == Method::geffner) {
    double lo = (1.0 - n) * M_lam;
    double hi = (n - 1.0) * lip(prior_bounds);
    for (const auto& b : post_bounds) {
      lo += b.first;
      hi += lip(b);
    }
    out.m = lo;
    out.M = hi;
  } else {
    if (static_cast<Index>(post_bounds.size()) != proxies.n) throw std::invalid_argument("bounds and proxies disagree on n");
    const auto [lam_min, lam_max] = linalg::eig_extremes(lambda_matrix(proxies, t));
    const auto [pl_min, pl_max] = linalg::eig_extremes(proxies.prior_proxy(t));
    (void)pl_max;
    double lo = (1.0 - n) * M_lam / pl_min;
    double hi = (n - 1.0) * lip(prior_bounds) / pl_min;
    for (std::size_t i = 0; i < post_bounds.size(); ++i) {
      const auto [s_min, s_max] = linalg::eig_extremes(proxies.post_proxy(static_cast<Index>(i), t));
      const double m_i = post_bounds[i].first;
      lo += m_i / (m_i >= 0.0 ? s_max : s_min);
      hi += lip(post_bounds[i]) / s_min;
    }
    out.m = lo >= 0.0 ? lo / lam_max : lo / lam_min;
    out.M = hi / lam_min;
  }
  out.log_concave = out.m > 0.0;
  return out;
}

std::pair<double, double> precision_extremes(const GaussianDist& g) {
  const auto [lo, hi] = linalg::eig_extremes(g.cov);
  if (!(lo > 0.0)) throw TuningError("bridging covariance is not positive definite");
  return {1.0 / hi, 1.0 / lo};
}

}  // namespace acl
