#include "acl/score_field.hpp"

#include "acl/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace acl {

namespace {

void check_batch(Index dim, const Eigen::Ref<const Matrix>& thetas, const Eigen::Ref<Matrix>& out) {
  if (thetas.rows() != dim || out.rows() != dim || out.cols() != thetas.cols()) {
    throw std::invalid_argument("score field batch dimension mismatch");
  }
}

}  // namespace

Vector ScoreField::operator()(const Vector& theta, double t) const {
  if (theta.size() != dim()) throw std::invalid_argument("score field input dimension mismatch");
  Matrix out(dim(), 1);
  evaluate(theta, t, out);
  return out.col(0);
}

MixtureScoreField::MixtureScoreField(GaussianMixture base, Schedule s) : base_(std::move(base)), schedule_(s) {
  schedule_.validate();
}

std::shared_ptr<const GaussianMixture> MixtureScoreField::at(double t) const {
  return cache_.get(t, [&] { return base_.diffused(schedule_, t); });
}

void MixtureScoreField::evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const {
  check_batch(dim(), thetas, out);
  at(t)->score_batch(thetas, out);
}

std::optional<ScoreField::Affine> MixtureScoreField::affine_at(double t) const {
  if (base_.size() != 1) return std::nullopt;
  const auto mix = at(t);
  const auto& c = mix->components().front();
  Matrix prec = linalg::spd_inverse(c.cov, "diffused covariance");
  Vector b = prec * c.mean;
  return Affine{-prec, std::move(b)};
}

void FunctionScoreField::evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const {
  check_batch(dim_, thetas, out);
  for (Index j = 0; j < thetas.cols(); ++j) {
    Vector r = fn_(thetas.col(j), t);
    if (r.size() != dim_) throw std::invalid_argument("score function returned wrong dimension");
    out.col(j) = r;
  }
}

AffineScoreField::AffineScoreField(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size() || a_.cols() != b_.size()) throw std::invalid_argument("affine field dimension mismatch");
}

void AffineScoreField::evaluate(const Eigen::Ref<const Matrix>& thetas, double, Eigen::Ref<Matrix> out) const {
  check_batch(dim(), thetas, out);
  out.noalias() = a_ * thetas;
  out.colwise() += b_;
}

std::optional<ScoreField::Affine> AffineScoreField::affine_at(double) const { return Affine{a_, b_}; }

PerturbedScoreField::PerturbedScoreField(ScoreFieldPtr base, ScoreFieldPtr delta) : base_(std::move(base)), delta_(std::move(delta)) {
  if (!base_ || !delta_ || base_->dim() != delta_->dim()) throw std::invalid_argument("perturbed field dimension mismatch");
}

void PerturbedScoreField::evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const {
  base_->evaluate(thetas, t, out);
  Matrix d(out.rows(), out.cols());
  delta_->evaluate(thetas, t, d);
  out += d;
}

ScoreFieldPtr prior_field(const Task& task, const Schedule& s) {
  return std::make_shared<MixtureScoreField>(task.prior, s);
}

ScoreFieldPtr posterior_field(const Task& task, Index i, const Schedule& s) {
  return std::make_shared<MixtureScoreField>(individual_posterior(task, i), s);
}

std::vector<ScoreFieldPtr> posterior_fields(const Task& task, const Schedule& s) {
  std::vector<ScoreFieldPtr> out;
  out.reserve(static_cast<std::size_t>(task.n()));
  for (Index i = 0; i < task.n(); ++i) out.push_back(posterior_field(task, i, s));
  return out;
}

ScoreFieldPtr joint_posterior_field(const Task& task, const Schedule& s, std::size_t cap) {
  if (task.kind == TaskKind::gaussian) {
    return std::make_shared<MixtureScoreField>(posterior_moments(task, std::nullopt).mixture, s);
  }
  return std::make_shared<MixtureScoreField>(joint_posterior(task, cap), s);
}

}  // namespace acl
