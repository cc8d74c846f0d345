#pragma once

#include "acl/mixture.hpp"
#include "acl/schedule.hpp"
#include "acl/tasks.hpp"
#include "acl/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>

namespace acl {

/// Time-dependent vector field theta -> grad log p_t(theta).
class ScoreField {
 public:
  /// s(theta) = a * theta + b at a fixed time.
  struct Affine {
    Matrix a;
    Vector b;
  };

  virtual ~ScoreField() = default;
  virtual Index dim() const = 0;

  /// Scores of the columns of a dim x N batch.
  virtual void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const = 0;

  /// Exact affine form at t when the field is affine in theta, else nullopt.
  virtual std::optional<Affine> affine_at(double /*t*/) const { return std::nullopt; }

  Vector operator()(const Vector& theta, double t) const;
};

using ScoreFieldPtr = std::shared_ptr<const ScoreField>;

/// Small read-mostly memo keyed by level time. Safe for concurrent readers;
/// evicts everything once it grows past `limit` entries.
template <typename V>
class TimeCache {
 public:
  explicit TimeCache(std::size_t limit = 64) : limit_(limit) {}

  template <typename Make>
  std::shared_ptr<const V> get(double t, Make&& make) const {
    {
      std::shared_lock lock(mu_);
      auto it = map_.find(t);
      if (it != map_.end()) return it->second;
    }
    auto value = std::make_shared<const V>(make());
    std::unique_lock lock(mu_);
    if (map_.size() >= limit_) map_.clear();
    return map_.emplace(t, std::move(value)).first->second;
  }

 private:
  std::size_t limit_;
  mutable std::shared_mutex mu_;
  mutable std::map<double, std::shared_ptr<const V>> map_;
};

/// Exact score of a Gaussian mixture diffused along the VP schedule.
class MixtureScoreField final : public ScoreField {
 public:
  MixtureScoreField(GaussianMixture base, Schedule s);

  Index dim() const override { return base_.dim(); }
  void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const override;
  std::optional<Affine> affine_at(double t) const override;

  const GaussianMixture& base() const { return base_; }
  std::shared_ptr<const GaussianMixture> at(double t) const;

 private:
  GaussianMixture base_;
  Schedule schedule_;
  TimeCache<GaussianMixture> cache_;
};

/// Wraps a plain function; evaluated column by column.
class FunctionScoreField final : public ScoreField {
 public:
  using Fn = std::function<Vector(const Vector&, double)>;
  FunctionScoreField(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  Index dim() const override { return dim_; }
  void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const override;

 private:
  Index dim_;
  Fn fn_;
};

/// Fixed affine field s(theta) = a theta + b, the same at every t.
class AffineScoreField final : public ScoreField {
 public:
  AffineScoreField(Matrix a, Vector b);

  Index dim() const override { return b_.size(); }
  void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const override;
  std::optional<Affine> affine_at(double t) const override;

 private:
  Matrix a_;
  Vector b_;
};

/// base + delta, used to inject controlled score errors.
class PerturbedScoreField final : public ScoreField {
 public:
  PerturbedScoreField(ScoreFieldPtr base, ScoreFieldPtr delta);

  Index dim() const override { return base_->dim(); }
  void evaluate(const Eigen::Ref<const Matrix>& thetas, double t, Eigen::Ref<Matrix> out) const override;

 private:
  ScoreFieldPtr base_;
  ScoreFieldPtr delta_;
};

ScoreFieldPtr prior_field(const Task& task, const Schedule& s);
ScoreFieldPtr posterior_field(const Task& task, Index i, const Schedule& s);
std::vector<ScoreFieldPtr> posterior_fields(const Task& task, const Schedule& s);
/// Exact score of the diffused joint posterior p_t(theta | x_{1:n}).
ScoreFieldPtr joint_posterior_field(const Task& task, const Schedule& s, std::size_t cap = 4096);

}  // namespace acl
