#include "acl/composite.hpp"

#include "acl/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace acl {

namespace {

void check_fields(const CompositeSpec& spec, const ScoreField& prior, const std::vector<ScoreFieldPtr>& posts) {
  if (static_cast<Index>(posts.size()) != spec.n) {
    throw std::invalid_argument("expected " + std::to_string(spec.n) + " posterior score fields, got " + std::to_string(posts.size()));
  }
  if (prior.dim() != spec.dim()) throw std::invalid_argument("prior score dimension does not match spec");
  for (const auto& p : posts) {
    if (!p || p->dim() != spec.dim()) throw std::invalid_argument("posterior score dimension does not match spec");
  }
}

Matrix precision_of(const Matrix& base, double t, const Schedule& s, ProxyRule rule) {
  if (rule == ProxyRule::diffused_marginal) return linalg::spd_inverse(diffuse_covariance(base, t, s), "diffused covariance");
  const double a = alpha(s, t);
  const double var = v(s, t);
  if (!(var > 0.0)) throw std::domain_error("backward covariance needs t > 0");
  Matrix p = linalg::spd_inverse(base, "base covariance");
  p.diagonal().array() += a / var;
  return p;
}

}  // namespace

Matrix diffuse_covariance(const Matrix& s0, double t, const Schedule& s) {
  if (!linalg::is_spd(s0)) throw std::invalid_argument("covariance to diffuse is not SPD");
  Matrix out = alpha(s, t) * s0;
  out.diagonal().array() += v(s, t);
  return linalg::symmetrize(out);
}

Matrix backward_covariance(const Matrix& s0, double t, const Schedule& s) {
  if (!linalg::is_spd(s0)) throw std::invalid_argument("covariance is not SPD");
  return linalg::spd_inverse(precision_of(s0, t, s, ProxyRule::backward_kernel), "backward precision");
}

void CompositeSpec::validate() const {
  if (n < 1) throw std::invalid_argument("composite needs n >= 1");
  if (static_cast<Index>(post_base.size()) != n) throw std::invalid_argument("one posterior covariance per observation is required");
  if (!linalg::is_spd(prior_base)) throw std::invalid_argument("prior covariance proxy is not SPD");
  for (const auto& c : post_base) {
    if (c.rows() != dim() || !linalg::is_spd(c)) throw std::invalid_argument("posterior covariance proxy is not SPD");
  }
  schedule.validate();
}

Matrix CompositeSpec::post_proxy(Index i, double t) const {
  const auto& c = post_base.at(static_cast<std::size_t>(i));
  return rule == ProxyRule::diffused_marginal ? diffuse_covariance(c, t, schedule) : backward_covariance(c, t, schedule);
}

Matrix CompositeSpec::prior_proxy(double t) const {
  return rule == ProxyRule::diffused_marginal ? diffuse_covariance(prior_base, t, schedule) : backward_covariance(prior_base, t, schedule);
}

Matrix CompositeSpec::post_precision(Index i, double t) const {
  return precision_of(post_base.at(static_cast<std::size_t>(i)), t, schedule, rule);
}

Matrix CompositeSpec::prior_precision(double t) const { return precision_of(prior_base, t, schedule, rule); }

Matrix lambda_matrix(const CompositeSpec& spec, double t) {
  Matrix lam = (1.0 - static_cast<double>(spec.n)) * spec.prior_precision(t);
  for (Index i = 0; i < spec.n; ++i) lam += spec.post_precision(i, t);
  lam = linalg::symmetrize(lam);
  if (!linalg::is_spd(lam)) throw TuningError("Lambda_t is not positive definite at t = " + std::to_string(t));
  return lam;
}

std::vector<Matrix> linhart_weights(const CompositeSpec& spec, double t) {
  std::vector<Matrix> prec;
  prec.reserve(static_cast<std::size_t>(spec.n) + 1);
  Matrix lam = Matrix::Zero(spec.dim(), spec.dim());
  for (Index i = 0; i < spec.n; ++i) {
    prec.push_back(spec.post_precision(i, t));
    lam += prec.back();
  }
  prec.push_back((1.0 - static_cast<double>(spec.n)) * spec.prior_precision(t));
  lam += prec.back();
  Eigen::LLT<Matrix> llt(linalg::symmetrize(lam));
  if (llt.info() != Eigen::Success) throw TuningError("Lambda_t is not positive definite at t = " + std::to_string(t));
  for (auto& p : prec) p = llt.solve(p);
  return prec;
}

Vector geffner_score(const CompositeSpec& spec, const ScoreField& prior, const std::vector<ScoreFieldPtr>& posts,
                     const Vector& theta, double t) {
  check_fields(spec, prior, posts);
  Vector out = (1.0 - static_cast<double>(spec.n)) * prior(theta, t);
  for (const auto& p : posts) out += (*p)(theta, t);
  return out;
}

Vector linhart_score(const CompositeSpec& spec, const ScoreField& prior, const std::vector<ScoreFieldPtr>& posts,
                     const Vector& theta, double t) {
  check_fields(spec, prior, posts);
  const auto w = linhart_weights(spec, t);
  Vector out = w.back() * prior(theta, t);
  for (std::size_t i = 0; i < posts.size(); ++i) out += w[i] * (*posts[i])(theta, t);
  return out;
}

double compose_dsm_error(double eps_prior, double eps_post, Index n, Method) {
  if (!(eps_prior >= 0.0) || !(eps_post >= 0.0)) throw std::invalid_argument("score error bounds must be nonnegative");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  return (static_cast<double>(n) - 1.0) * eps_prior + static_cast<double>(n) * eps_post;
}

CompositeScoreField::CompositeScoreField(CompositeSpec spec, ScoreFieldPtr prior, std::vector<ScoreFieldPtr> posts)
    : spec_(std::move(spec)), prior_(std::move(prior)), posts_(std::move(posts)) {
  if (!prior_) throw std::invalid_argument("prior score field is null");
  if (spec_.method == Method::linhart) spec_.validate();
  if (spec_.n < 1) throw std::invalid_argument("composite needs n >= 1");
  check_fields(spec_, *prior_, posts_);
}

std::shared_ptr<const std::vector<Matrix>> CompositeScoreField::weights(double t) const {
  return weight_cache_.get(t, [&] { return linhart_weights(spec_, t); });
}

void CompositeScoreField::evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const {
  if (thetas.rows() != dim() || out.rows() != dim() || out.cols() != thetas.cols()) {
    throw std::invalid_argument("composite batch dimension mismatch");
  }
  const Index cols = thetas.cols();
  Matrix tmp(dim(), cols);
  prior_->evaluate(thetas, t, tmp);
  if (spec_.method == Method::geffner) {
    out = (1.0 - static_cast<double>(spec_.n)) * tmp;
    for (const auto& p : posts_) {
      p->evaluate(thetas, t, tmp);
      out += tmp;
    }
    return;
  }
  const auto w = weights(t);
  out.noalias() = w->back() * tmp;
  for (std::size_t i = 0; i < posts_.size(); ++i) {
    posts_[i]->evaluate(thetas, t, tmp);
    out.noalias() += (*w)[i] * tmp;
  }
}

std::optional<ScoreField::Affine> CompositeScoreField::affine_at(double t) const {
  auto cached = affine_cache_.get(t, [&]() -> std::optional<Affine> {
    auto pa = prior_->affine_at(t);
    if (!pa) return std::nullopt;
    std::vector<Affine> parts;
    for (const auto& p : posts_) {
      auto a = p->affine_at(t);
      if (!a) return std::nullopt;
      parts.push_back(std::move(*a));
    }
    Affine out;
    if (spec_.method == Method::geffner) {
      const double c = 1.0 - static_cast<double>(spec_.n);
      out.a = c * pa->a;
      out.b = c * pa->b;
      for (const auto& a : parts) {
        out.a += a.a;
        out.b += a.b;
      }
    } else {
      const auto w = weights(t);
      out.a = w->back() * pa->a;
      out.b = w->back() * pa->b;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        out.a += (*w)[i] * parts[i].a;
        out.b += (*w)[i] * parts[i].b;
      }
    }
    return out;
  });
  return *cached;
}

CompositeSpec make_spec(const Task& task, Method method, const Schedule& s, ProxyRule rule) {
  CompositeSpec spec;
  spec.method = method;
  spec.n = task.n();
  spec.schedule = s;
  spec.rule = rule;
  spec.prior_base = task.prior.moments().cov;
  for (Index i = 0; i < task.n(); ++i) spec.post_base.push_back(posterior_moments(task, i).cov);
  return spec;
}

std::shared_ptr<const CompositeScoreField> make_composite(const Task& task, Method method, const Schedule& s, ProxyRule rule) {
  return std::make_shared<CompositeScoreField>(make_spec(task, method, s, rule), prior_field(task, s), posterior_fields(task, s));
}

}  // namespace acl
