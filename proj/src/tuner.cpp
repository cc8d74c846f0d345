#include "acl/tuner.hpp"

#include "acl/linalg.hpp"
#include "acl/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace acl {

namespace {

constexpr double kBiasConst = 1.65;
constexpr long long kMaxSteps = 100'000'000;

}  // namespace

void TuningConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("omega must lie in (0, 1)");
  if (!(eps_dsm >= 0.0)) throw std::invalid_argument("eps_dsm must be nonnegative");
  if (T < 1) throw std::invalid_argument("T must be >= 1");
}

double default_omega(Index dim) { return dim >= 10 ? 0.8 : 0.5; }

long long LevelPlan::total_steps() const {
  long long s = 0;
  for (const auto& l : levels) s += l.k;
  return s;
}

double bias_term(double m, double M, double h, Index d, double eps) {
  if (!(m > 0.0)) throw std::invalid_argument("bias term needs m > 0");
  if (!(h >= 0.0)) throw std::invalid_argument("bias term needs h >= 0");
  return kBiasConst * (M / m) * std::sqrt(h * static_cast<double>(d)) + eps / m;
}

double choose_step(double m, double M, const TuningConfig& cfg, Index d) {
  cfg.validate();
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(m > 0.0)) throw TuningError("bridging density is not strongly log-concave (m = " + std::to_string(m) + ")");
  if (!(M >= m)) throw std::invalid_argument("need m <= M");
  const double budget = cfg.omega * cfg.gamma - cfg.eps_dsm / m;
  if (!(budget > 0.0)) {
    throw TuningError("score error too large for the requested accuracy: eps/m = " + std::to_string(cfg.eps_dsm / m) +
                      " >= omega*gamma = " + std::to_string(cfg.omega * cfg.gamma));
  }
  const double ratio = m / M;
  const double cap_bias = budget * budget / (static_cast<double>(d) * kBiasConst * kBiasConst) * ratio * ratio;
  const double cap_stable = 2.0 / (m + M);
  double h = cap_bias < cap_stable ? cap_bias : std::nextafter(cap_stable, 0.0);
  // the caps hold in exact arithmetic; walk down until they hold in floating point too
  while (h > 0.0 && bias_term(m, M, h, d, cfg.eps_dsm) > cfg.omega * cfg.gamma) h = std::nextafter(h, 0.0);
  if (!(h > 0.0)) throw TuningError("no positive step size satisfies the bias budget");
  return h;
}

long long choose_steps(double m, double h, double w2_next, const TuningConfig& cfg) {
  cfg.validate();
  const double mh = m * h;
  if (!(mh > 0.0 && mh < 1.0)) throw std::invalid_argument("choose_steps needs 0 < m h < 1");
  if (!(w2_next >= 0.0)) throw std::invalid_argument("w2_next must be nonnegative");
  const double target = (1.0 - cfg.omega) * cfg.gamma;
  const double start = cfg.gamma + w2_next;
  const double raw = std::log(target / start) / std::log1p(-mh);
  if (!(raw < static_cast<double>(kMaxSteps))) {
    throw TuningError("step count exceeds " + std::to_string(kMaxSteps) + " (m h = " + std::to_string(mh) + ")");
  }
  long long k = std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
  while (std::pow(1.0 - mh, static_cast<double>(k)) * start > target) ++k;
  return k;
}

double global_bound(const LevelPlan& plan) {
  // nested form of the sum: e_p = c_p (e_{p+1} + w_p) + B_p from the top level down
  double e = 0.0;
  for (auto it = plan.levels.rbegin(); it != plan.levels.rend(); ++it) {
    const double c = std::pow(1.0 - it->m * it->h, static_cast<double>(it->k));
    e = c * (e + it->w2_next) + it->B;
  }
  return e;
}

GaussianDist gaussian_proxy(const Task& task, std::optional<Index> i) {
  if (!i) return task.prior.moments();
  auto pm = posterior_moments(task, *i);
  return {std::move(pm.mean), std::move(pm.cov)};
}

GaussianDist proxy_compose(const GaussianDist& prior, const std::vector<GaussianDist>& posts) {
  if (posts.empty()) throw std::invalid_argument("proxy_compose needs at least one posterior proxy");
  const Index d = prior.dim();
  const double n = static_cast<double>(posts.size());
  const Matrix pl = linalg::spd_inverse(prior.cov, "prior proxy covariance");
  Matrix prec = (1.0 - n) * pl;
  Vector h = prec * prior.mean;
  for (const auto& p : posts) {
    if (p.dim() != d) throw std::invalid_argument("proxy dimension mismatch");
    const Matrix pi = linalg::spd_inverse(p.cov, "posterior proxy covariance");
    prec += pi;
    h += pi * p.mean;
  }
  prec = linalg::symmetrize(prec);
  Eigen::LLT<Matrix> llt(prec);
  if (llt.info() != Eigen::Success) {
    const auto [lo, hi] = linalg::eig_extremes(prec);
    (void)hi;
    throw TuningError("composed proxy precision is not positive definite (smallest eigenvalue " + std::to_string(lo) + ")");
  }
  Matrix cov = linalg::symmetrize(llt.solve(Matrix::Identity(d, d)));
  Vector mean = cov * h;
  return {std::move(mean), std::move(cov)};
}

std::vector<GaussianDist> plan_bridges(const Task& task, Method method, const LevelGrid& grid, const Schedule& s) {
  std::vector<GaussianDist> out;
  out.reserve(grid.times.size());
  if (task.kind == TaskKind::gaussian) {
    for (double t : grid.times) out.push_back(bridging_moments(task, method, t, s));
    return out;
  }
  const GaussianDist prior = gaussian_proxy(task, std::nullopt);
  std::vector<GaussianDist> posts;
  for (Index i = 0; i < task.n(); ++i) posts.push_back(gaussian_proxy(task, i));
  for (double t : grid.times) out.push_back(bridging_from_proxies(prior, posts, method, t, s));
  return out;
}

LevelPlan plan_from_bridges(const std::vector<GaussianDist>& bridges, const LevelGrid& grid, Method method,
                            const TuningConfig& cfg) {
  cfg.validate();
  if (bridges.size() != grid.times.size() || bridges.size() < 2) {
    throw std::invalid_argument("need one bridging density per grid time");
  }
  LevelPlan plan;
  plan.method = method;
  plan.dim = bridges.front().dim();
  plan.config = cfg;
  plan.t_end = grid.times.back();
  const int T = grid.levels();
  for (int p = 0; p < T; ++p) {
    try {
      LevelRecord r;
      r.t = grid.times[static_cast<std::size_t>(p)];
      const auto [m, M] = precision_extremes(bridges[static_cast<std::size_t>(p)]);
      r.m = m;
      r.M = M;
      r.w2_next = gaussian_w2(bridges[static_cast<std::size_t>(p) + 1], bridges[static_cast<std::size_t>(p)]);
      r.h = choose_step(m, M, cfg, plan.dim);
      r.k = choose_steps(m, r.h, r.w2_next, cfg);
      r.B = bias_term(m, M, r.h, plan.dim, cfg.eps_dsm);
      plan.levels.push_back(r);
    } catch (const TuningError& e) {
      if (e.level() >= 0) throw;
      throw TuningError(e.what(), p);
    }
  }
  return plan;
}

LevelPlan plan(const Task& task, Method method, const TuningConfig& cfg, const Schedule& s) {
  cfg.validate();
  s.validate();
  if (task.n() < 1) throw std::invalid_argument("planning needs at least one observation");
  const LevelGrid grid = levels(s, cfg.T);
  std::vector<GaussianDist> bridges;
  try {
    bridges = plan_bridges(task, method, grid, s);
  } catch (const TuningError& e) {
    throw TuningError(std::string("bridging density: ") + e.what());
  }
  LevelPlan out = plan_from_bridges(bridges, grid, method, cfg);
  out.proxy = task.kind != TaskKind::gaussian;
  return out;
}

}  // namespace acl
