#include "acl/tasks.hpp"

#include "acl/linalg.hpp"
#include "acl/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace acl {

namespace {

constexpr std::uint64_t kStreamSigma = 1;
constexpr std::uint64_t kStreamTheta = 2;
constexpr std::uint64_t kStreamObs = 3;
constexpr std::uint64_t kStreamExact = 0xE8AC7;

Vector draw_normal(const CounterStream& rng, Index d, std::uint64_t first) {
  Vector z(d);
  rng.normals(first, static_cast<std::size_t>(d), z.data());
  return z;
}

// Draw one point from a mixture with a dedicated stream: counter 0 picks the
// component, normals start at index 2.
Vector draw_from_mixture(const GaussianMixture& mix, const CounterStream& rng) {
  const auto& comps = mix.components();
  std::size_t pick = comps.size() - 1;
  double u = rng.uniform(0);
  double acc = 0.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    acc += std::exp(comps[c].log_weight);
    if (u < acc) {
      pick = c;
      break;
    }
  }
  const auto& comp = comps[pick];
  Eigen::LLT<Matrix> llt(comp.cov);
  return comp.mean + llt.matrixL() * draw_normal(rng, mix.dim(), 2);
}

Vector linear_diag(Index d, double lo, double hi) {
  Vector diag(d);
  for (Index k = 0; k < d; ++k) {
    diag(k) = d == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(d - 1);
  }
  return diag;
}

struct Partial {
  double log_weight;
  Vector mean;
  Matrix cov;
};

// Condition N(mean, cov) on x ~ N(theta, lik_cov); returns updated partial
// with the log marginal of x added to the weight.
Partial condition(const Partial& p, const Vector& x, const LikelihoodComponent& lik) {
  const Matrix s = p.cov + lik.cov;
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("marginal covariance is not SPD");
  const Vector y = llt.matrixL().solve(x - p.mean);
  const double half_log_det = llt.matrixLLT().diagonal().array().log().sum();
  const double lm = -0.5 * y.squaredNorm() - half_log_det - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
  // K = cov S^-1 ; mean' = mean + K (x - mean) ; cov' = cov - K cov
  const Matrix kt = llt.solve(p.cov);  // S^-1 cov = K^T
  Partial out;
  out.log_weight = p.log_weight + std::log(lik.weight) + lm;
  out.mean = p.mean + kt.transpose() * (x - p.mean);
  out.cov = linalg::symmetrize(p.cov - p.cov * kt);
  return out;
}

void check_index(const Task& task, Index i) {
  if (i < 0 || i >= task.n()) {
    throw std::invalid_argument("observation index " + std::to_string(i) + " out of range [0, " + std::to_string(task.n()) + ")");
  }
}

void check_theta(const Task& task, const Vector& theta) {
  if (theta.size() != task.dim) throw std::invalid_argument("theta dimension does not match task");
}

}  // namespace

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::gaussian: return "gaussian";
    case TaskKind::gmm_prior: return "gmm_prior";
    case TaskKind::gmm_likelihood: return "gmm_likelihood";
  }
  return "?";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "gaussian") return TaskKind::gaussian;
  if (s == "gmm_prior") return TaskKind::gmm_prior;
  if (s == "gmm_likelihood") return TaskKind::gmm_likelihood;
  throw std::invalid_argument("unknown task kind '" + std::string(s) + "'");
}

void Task::validate() const {
  if (dim < 1) throw std::invalid_argument("task dimension must be >= 1");
  if (prior.dim() != dim) throw std::invalid_argument("prior dimension does not match task");
  if (likelihood.empty()) throw std::invalid_argument("task has no likelihood components");
  double wsum = 0.0;
  for (const auto& c : likelihood) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("likelihood weights must be nonnegative");
    if (c.cov.rows() != dim || !linalg::is_spd(c.cov)) throw std::invalid_argument("likelihood covariance must be SPD of task dimension");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw std::invalid_argument("likelihood weights must sum to 1");
  for (const auto& x : observations) {
    if (x.size() != dim) throw std::invalid_argument("observation length does not match task dimension");
    if (!x.allFinite()) throw std::invalid_argument("observation is not finite");
  }
}

void TaskParams::validate() const {
  if (dim < 1) throw std::invalid_argument("task.dim must be >= 1");
  if (!(lik_eig_lo > 0.0 && lik_eig_lo <= lik_eig_hi)) throw std::invalid_argument("likelihood eigenvalue range must satisfy 0 < lo <= hi");
  if (kind == TaskKind::gmm_prior) {
    const std::size_t k = prior_means.empty() ? 2 : prior_means.size();
    if (prior_scales.size() != k || prior_weights.size() != k) {
      throw std::invalid_argument("gmm prior means, scales and weights must have equal length");
    }
    for (const auto& m : prior_means) {
      if (m.size() != dim) throw std::invalid_argument("gmm prior mean length does not match task.dim");
    }
    double ws = 0.0;
    for (double w : prior_weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("gmm prior weights must be nonnegative");
      ws += w;
    }
    if (std::abs(ws - 1.0) > 1e-9) throw std::invalid_argument("gmm prior weights must sum to 1");
    for (double s : prior_scales) {
      if (!(s > 0.0)) throw std::invalid_argument("gmm prior scales must be positive");
    }
  }
  if (kind == TaskKind::gmm_likelihood) {
    if (!(gmm_lik_diag_lo > 0.0 && gmm_lik_diag_lo <= gmm_lik_diag_hi)) throw std::invalid_argument("gmm likelihood diagonal range must satisfy 0 < lo <= hi");
    if (gmm_lik_factors.empty() || gmm_lik_factors.size() != gmm_lik_weights.size()) {
      throw std::invalid_argument("gmm likelihood factors and weights must have equal nonzero length");
    }
    double ws = 0.0;
    for (double w : gmm_lik_weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("gmm likelihood weights must be nonnegative");
      ws += w;
    }
    if (std::abs(ws - 1.0) > 1e-9) throw std::invalid_argument("gmm likelihood weights must sum to 1");
    for (double f : gmm_lik_factors) {
      if (!(f > 0.0)) throw std::invalid_argument("gmm likelihood factors must be positive");
    }
  }
  if (component_cap < 1) throw std::invalid_argument("component cap must be >= 1");
}

Matrix random_spd(Index dim, double lo, double hi, bool rotate, std::uint64_t seed) {
  const CounterStream rng{seed, kStreamSigma};
  Vector ev(dim);
  for (Index k = 0; k < dim; ++k) {
    ev(k) = std::exp(std::log(lo) + rng.uniform(static_cast<std::uint64_t>(k)) * (std::log(hi) - std::log(lo)));
  }
  if (!rotate) return ev.asDiagonal();
  const CounterStream grng{seed, kStreamSigma, 1};
  Matrix g(dim, dim);
  grng.normals(0, static_cast<std::size_t>(dim * dim), g.data());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < dim; ++k) {
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  return linalg::symmetrize(q * ev.asDiagonal() * q.transpose());
}

Task make_task(const TaskParams& params, Index n, std::uint64_t data_seed) {
  params.validate();
  if (n < 0) throw std::invalid_argument("observation count must be >= 0");
  const Index d = params.dim;
  Task task;
  task.kind = params.kind;
  task.dim = d;

  switch (params.kind) {
    case TaskKind::gaussian:
    case TaskKind::gmm_prior: {
      task.base_cov = random_spd(d, params.lik_eig_lo, params.lik_eig_hi, params.lik_random_rotation, data_seed);
      task.likelihood = {LikelihoodComponent{1.0, task.base_cov}};
      if (params.kind == TaskKind::gaussian) {
        task.prior = GaussianMixture::single({Vector::Zero(d), Matrix::Identity(d, d)});
      } else {
        std::vector<Vector> means = params.prior_means;
        if (means.empty()) means = {Vector::Zero(d), Vector::Ones(d)};
        std::vector<GaussianMixture::Component> comps;
        for (std::size_t j = 0; j < means.size(); ++j) {
          const double sc = params.prior_scales[j];
          comps.push_back({std::log(params.prior_weights[j]), means[j], sc * sc * Matrix::Identity(d, d)});
        }
        task.prior = GaussianMixture(std::move(comps));
      }
      break;
    }
    case TaskKind::gmm_likelihood: {
      task.base_cov = linear_diag(d, params.gmm_lik_diag_lo, params.gmm_lik_diag_hi).asDiagonal();
      for (std::size_t c = 0; c < params.gmm_lik_factors.size(); ++c) {
        task.likelihood.push_back({params.gmm_lik_weights[c], params.gmm_lik_factors[c] * task.base_cov});
      }
      task.prior = GaussianMixture::single({Vector::Zero(d), Matrix::Identity(d, d)});
      break;
    }
  }

  task.theta_true = draw_from_mixture(task.prior, CounterStream{data_seed, kStreamTheta});
  std::vector<GaussianMixture::Component> lik_comps;
  for (const auto& c : task.likelihood) lik_comps.push_back({std::log(c.weight), task.theta_true, c.cov});
  const GaussianMixture lik(std::move(lik_comps));
  for (Index i = 0; i < n; ++i) {
    task.observations.push_back(draw_from_mixture(lik, CounterStream{data_seed, kStreamObs, static_cast<std::uint64_t>(i)}));
  }
  task.validate();
  return task;
}

Task with_first_observations(const Task& task, Index n) {
  if (n < 0 || n > task.n()) throw std::invalid_argument("cannot take more observations than the task holds");
  Task out = task;
  out.observations.resize(static_cast<std::size_t>(n));
  return out;
}

Vector prior_score(const Task& task, const Schedule& s, const Vector& theta, double t) {
  check_theta(task, theta);
  return task.prior.diffused(s, t).score(theta);
}

GaussianMixture individual_posterior(const Task& task, Index i) {
  check_index(task, i);
  const Vector& x = task.observations[static_cast<std::size_t>(i)];
  std::vector<GaussianMixture::Component> comps;
  for (const auto& pc : task.prior.components()) {
    for (const auto& lc : task.likelihood) {
      Partial p = condition({pc.log_weight, pc.mean, pc.cov}, x, lc);
      comps.push_back({p.log_weight, std::move(p.mean), std::move(p.cov)});
    }
  }
  return GaussianMixture(std::move(comps));
}

Vector individual_posterior_score(const Task& task, const Schedule& s, Index i, const Vector& theta, double t) {
  check_theta(task, theta);
  return individual_posterior(task, i).diffused(s, t).score(theta);
}

PosteriorMoments posterior_moments(const Task& task, std::optional<Index> i) {
  if (i) {
    GaussianMixture mix = individual_posterior(task, *i);
    auto g = mix.moments();
    return {std::move(g.mean), std::move(g.cov), std::move(mix)};
  }
  if (task.kind != TaskKind::gaussian) {
    throw UnsupportedError("joint posterior moments are only available for the gaussian task; use exact_posterior_sample");
  }
  const Index d = task.dim;
  const Matrix prec_lik = linalg::spd_inverse(task.base_cov, "likelihood covariance");
  Vector xsum = Vector::Zero(d);
  for (const auto& x : task.observations) xsum += x;
  Matrix prec = static_cast<double>(task.n()) * prec_lik;
  prec.diagonal().array() += 1.0;
  Matrix cov = linalg::spd_inverse(prec, "posterior precision");
  Vector mean = cov * (prec_lik * xsum);
  GaussianMixture mix = GaussianMixture::single({mean, cov});
  return {std::move(mean), std::move(cov), std::move(mix)};
}

GaussianMixture joint_posterior(const Task& task, std::size_t cap) {
  const std::size_t kp = task.prior.size();
  const std::size_t kl = task.likelihood.size();
  double total = static_cast<double>(kp) * std::pow(static_cast<double>(kl), static_cast<double>(task.n()));
  if (total > static_cast<double>(cap)) {
    throw std::length_error("exact posterior needs " + std::to_string(static_cast<long double>(total)) +
                            " components, above the cap of " + std::to_string(cap));
  }
  std::vector<Partial> frontier;
  for (const auto& pc : task.prior.components()) frontier.push_back({pc.log_weight, pc.mean, pc.cov});
  for (const auto& x : task.observations) {
    std::vector<Partial> next;
    next.reserve(frontier.size() * kl);
    for (const auto& p : frontier) {
      for (const auto& lc : task.likelihood) next.push_back(condition(p, x, lc));
    }
    frontier = std::move(next);
  }
  std::vector<GaussianMixture::Component> comps;
  comps.reserve(frontier.size());
  for (auto& p : frontier) comps.push_back({p.log_weight, std::move(p.mean), std::move(p.cov)});
  return GaussianMixture(std::move(comps));
}

PointMatrix sample_mixture(const GaussianMixture& mix, Index count, std::uint64_t seed, std::uint64_t stream) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const Index d = mix.dim();
  const auto& comps = mix.components();
  std::vector<Matrix> chol;
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& c : comps) {
    chol.push_back(Eigen::LLT<Matrix>(c.cov).matrixL());
    acc += std::exp(c.log_weight);
    cum.push_back(acc);
  }
  PointMatrix out(count, d);
  for (Index j = 0; j < count; ++j) {
    const CounterStream rng{seed, stream, static_cast<std::uint64_t>(j)};
    const double u = rng.uniform(0) * acc;
    std::size_t pick = comps.size() - 1;
    for (std::size_t c = 0; c < cum.size(); ++c) {
      if (u < cum[c]) {
        pick = c;
        break;
      }
    }
    out.row(j) = (comps[pick].mean + chol[pick] * draw_normal(rng, d, 2)).transpose();
  }
  return out;
}

SampleSet exact_posterior_sample(const Task& task, Index count, std::uint64_t seed, std::size_t cap) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  GaussianMixture post = task.kind == TaskKind::gaussian ? posterior_moments(task, std::nullopt).mixture : joint_posterior(task, cap);
  SampleSet out;
  out.points = sample_mixture(post, count, seed, kStreamExact);
  out.level = 0.0;
  out.seed = seed;
  out.steps_used = 0;
  return out;
}

}  // namespace acl
