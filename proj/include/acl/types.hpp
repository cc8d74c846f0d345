#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace acl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Row-major so that rows are points and the buffer doubles as a
/// column-major dim x count matrix of chains.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Method { geffner, linhart };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// Requested operation is valid but not defined for this task family.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when the decision rule cannot produce admissible hyperparameters
/// (m <= 0, omega*gamma <= eps/m, non-SPD composed precision, ...).
class TuningError : public std::runtime_error {
 public:
  TuningError(const std::string& what, int level = -1)
      : std::runtime_error(level >= 0 ? what + " (level " + std::to_string(level) + ")" : what),
        level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// Gaussian N(mean, cov). The covariance must be symmetric positive definite.
struct GaussianDist {
  Vector mean;
  Matrix cov;

  Index dim() const { return mean.size(); }
};

/// Batch of parameter vectors (one per row) plus provenance.
struct SampleSet {
  PointMatrix points;
  double level = 0.0;
  std::uint64_t seed = 0;
  long long steps_used = 0;

  Index count() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

}  // namespace acl
