#include "acl/mixture.hpp"

#include "acl/linalg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace acl {

double log_sum_exp(const Eigen::Ref<const Vector>& x) {
  const double mx = x.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((x.array() - mx).exp().sum());
}

GaussianMixture::GaussianMixture(std::vector<Component> components) : comps_(std::move(components)) {
  if (comps_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = comps_.front().mean.size();
  Vector lw(static_cast<Index>(comps_.size()));
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const auto& comp = comps_[c];
    if (comp.mean.size() != dim_ || comp.cov.rows() != dim_ || comp.cov.cols() != dim_) {
      throw std::invalid_argument("mixture component dimension mismatch");
    }
    if (std::isnan(comp.log_weight)) throw std::invalid_argument("mixture weight is NaN");
    lw(static_cast<Index>(c)) = comp.log_weight;
  }
  const double total = log_sum_exp(lw);
  if (!std::isfinite(total)) throw std::invalid_argument("mixture weights do not normalize");

  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  factors_.reserve(comps_.size());
  for (auto& comp : comps_) {
    comp.log_weight -= total;
    comp.cov = linalg::symmetrize(comp.cov);
    auto llt = linalg::cholesky(comp.cov, "mixture component covariance");
    const double half_log_det = llt.matrixLLT().diagonal().array().log().sum();
    factors_.push_back({std::move(llt), comp.log_weight - half_log_det - static_cast<double>(dim_) * half_log_2pi});
  }
}

GaussianMixture GaussianMixture::single(const GaussianDist& g) {
  return GaussianMixture({Component{0.0, g.mean, g.cov}});
}

std::vector<double> GaussianMixture::weights() const {
  std::vector<double> w;
  w.reserve(comps_.size());
  for (const auto& c : comps_) w.push_back(std::exp(c.log_weight));
  return w;
}

GaussianMixture GaussianMixture::diffused(const Schedule& s, double t) const {
  const double a = alpha(s, t);
  const double var = acl::v(s, t);
  const double ra = std::sqrt(a);
  std::vector<Component> out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) {
    Matrix cov = a * c.cov;
    cov.diagonal().array() += var;
    out.push_back({c.log_weight, ra * c.mean, std::move(cov)});
  }
  return GaussianMixture(std::move(out));
}

double GaussianMixture::log_pdf(const Vector& theta) const {
  if (theta.size() != dim_) throw std::invalid_argument("log_pdf dimension mismatch");
  Vector lp(static_cast<Index>(comps_.size()));
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    Vector y = factors_[c].llt.matrixL().solve(theta - comps_[c].mean);
    lp(static_cast<Index>(c)) = factors_[c].log_norm - 0.5 * y.squaredNorm();
  }
  return log_sum_exp(lp);
}

Vector GaussianMixture::responsibilities(const Vector& theta) const {
  if (theta.size() != dim_) throw std::invalid_argument("responsibilities dimension mismatch");
  Vector lp(static_cast<Index>(comps_.size()));
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    Vector y = factors_[c].llt.matrixL().solve(theta - comps_[c].mean);
    lp(static_cast<Index>(c)) = factors_[c].log_norm - 0.5 * y.squaredNorm();
  }
  const double total = log_sum_exp(lp);
  return (lp.array() - total).exp().matrix();
}

Vector GaussianMixture::score(const Vector& theta) const {
  if (theta.size() != dim_) throw std::invalid_argument("score dimension mismatch");
  Matrix out(dim_, 1);
  score_batch(theta, out);
  return out.col(0);
}

void GaussianMixture::score_batch(const Eigen::Ref<const Matrix>& thetas, Eigen::Ref<Matrix> out) const {
  if (thetas.rows() != dim_ || out.rows() != dim_ || out.cols() != thetas.cols()) {
    throw std::invalid_argument("score_batch dimension mismatch");
  }
  const Index n = thetas.cols();
  if (comps_.size() == 1) {
    Matrix diff = thetas.colwise() - comps_[0].mean;
    out.noalias() = -factors_[0].llt.solve(diff);
    return;
  }
  const Index k = static_cast<Index>(comps_.size());
  Matrix logp(k, n);
  std::vector<Matrix> grads(comps_.size());
  for (Index c = 0; c < k; ++c) {
    const auto& f = factors_[static_cast<std::size_t>(c)];
    Matrix y = thetas.colwise() - comps_[static_cast<std::size_t>(c)].mean;
    f.llt.matrixL().solveInPlace(y);
    logp.row(c) = (f.log_norm - 0.5 * y.colwise().squaredNorm().array()).matrix();
    f.llt.matrixU().solveInPlace(y);
    grads[static_cast<std::size_t>(c)] = std::move(y);
  }
  out.setZero();
  for (Index j = 0; j < n; ++j) {
    const double mx = logp.col(j).maxCoeff();
    Vector w = (logp.col(j).array() - mx).exp().matrix();
    w /= w.sum();
    for (Index c = 0; c < k; ++c) {
      out.col(j).noalias() -= w(c) * grads[static_cast<std::size_t>(c)].col(j);
    }
  }
}

GaussianDist GaussianMixture::moments() const {
  Vector mean = Vector::Zero(dim_);
  const auto w = weights();
  for (std::size_t c = 0; c < comps_.size(); ++c) mean += w[c] * comps_[c].mean;
  Matrix cov = Matrix::Zero(dim_, dim_);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const Vector d = comps_[c].mean - mean;
    cov += w[c] * (comps_[c].cov + d * d.transpose());
  }
  return {mean, linalg::symmetrize(cov)};
}

}  // namespace acl
