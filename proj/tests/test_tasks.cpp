#include "acl/score_field.hpp"
#include "acl/tasks.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace acl;

namespace {

Task identity_gaussian_task(std::vector<Vector> xs) {
  Task t;
  t.kind = TaskKind::gaussian;
  t.dim = xs.front().size();
  t.prior = GaussianMixture::single({Vector::Zero(t.dim), Matrix::Identity(t.dim, t.dim)});
  t.base_cov = Matrix::Identity(t.dim, t.dim);
  t.likelihood = {{1.0, t.base_cov}};
  t.observations = std::move(xs);
  t.theta_true = Vector::Zero(t.dim);
  return t;
}

Task symmetric_gmm_prior_task(const Vector& x, double mu = 1.5, double scale = 0.5) {
  Task t;
  t.kind = TaskKind::gmm_prior;
  t.dim = 2;
  const Matrix c = scale * scale * Matrix::Identity(2, 2);
  t.prior = GaussianMixture({{std::log(0.5), Vector::Constant(2, mu), c}, {std::log(0.5), Vector::Constant(2, -mu), c}});
  t.base_cov = Matrix::Identity(2, 2);
  t.likelihood = {{1.0, t.base_cov}};
  t.observations = {x};
  t.theta_true = Vector::Zero(2);
  return t;
}

double rel_err(const Vector& got, const Vector& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace

TEST_CASE("gaussian prior score is -theta at every t") {
  TaskParams p;
  p.dim = 2;
  const Task task = make_task(p, 3, 7);
  const Schedule s;
  Vector th(2);
  th << 0.7, -0.2;
  for (double t : {1e-5, 0.2, 0.5, 0.9, 1.0}) {
    const Vector g = prior_score(task, s, th, t);
    CHECK(g(0) == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(g(1) == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("symmetric gmm prior score vanishes at the origin") {
  const Task task = symmetric_gmm_prior_task(Vector::Zero(2));
  const Schedule s;
  for (double t : {1e-5, 0.3, 0.8}) CHECK(prior_score(task, s, Vector::Zero(2), t).norm() < 1e-12);
}

TEST_CASE("individual posterior score, conjugate example") {
  Vector x(2);
  x << 2.0, 0.0;
  const Task task = identity_gaussian_task({x});
  Vector th(2);
  th << 1.0, 0.0;
  CHECK(individual_posterior_score(task, Schedule{}, 0, th, 0.0).norm() < 1e-12);
  const auto pm = posterior_moments(task, 0);
  CHECK(pm.mean(0) == doctest::Approx(1.0));
  CHECK(pm.mean(1) == doctest::Approx(0.0));
  CHECK((pm.cov - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("score tends to -theta as t -> 1") {
  const Schedule s;
  for (auto kind : {TaskKind::gaussian, TaskKind::gmm_prior, TaskKind::gmm_likelihood}) {
    TaskParams p;
    p.kind = kind;
    p.dim = kind == TaskKind::gmm_likelihood ? 4 : 2;
    const Task task = make_task(p, 2, 11);
    Vector th = Vector::LinSpaced(p.dim, -1.0, 1.5);
    // the leading correction is the sqrt(alpha_1)-scaled mean shift
    CHECK(rel_err(individual_posterior_score(task, s, 1, th, 1.0), -th) < 5.0 * std::sqrt(alpha(s, 1.0)));
  }
}

TEST_CASE("joint posterior moments for zero data") {
  Task task = identity_gaussian_task({Vector::Zero(3), Vector::Zero(3), Vector::Zero(3), Vector::Zero(3)});
  task.base_cov = Vector::LinSpaced(3, 0.5, 2.0).asDiagonal();
  task.likelihood = {{1.0, task.base_cov}};
  const auto pm = posterior_moments(task, std::nullopt);
  CHECK(pm.mean.norm() < 1e-14);
  const Matrix want = (4.0 * task.base_cov.inverse() + Matrix::Identity(3, 3)).inverse();
  CHECK((pm.cov - want).norm() < 1e-12);
}

TEST_CASE("symmetric gmm prior gives equal posterior weights for an equidistant observation") {
  Vector x(2);
  x << 1.0, -1.0;  // same distance to (1.5, 1.5) and (-1.5, -1.5)
  const Task task = symmetric_gmm_prior_task(x);
  const auto w = posterior_moments(task, 0).mixture.weights();
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("joint posterior moments are unsupported for mixture tasks") {
  TaskParams p;
  p.kind = TaskKind::gmm_prior;
  const Task task = make_task(p, 3, 1);
  CHECK_THROWS_AS(posterior_moments(task, std::nullopt), UnsupportedError);
  CHECK_NOTHROW(posterior_moments(task, 2));
}

TEST_CASE("observation index out of range") {
  TaskParams p;
  const Task task = make_task(p, 3, 1);
  CHECK_THROWS_AS(individual_posterior_score(task, Schedule{}, 3, Vector::Zero(2), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(individual_posterior_score(task, Schedule{}, -1, Vector::Zero(2), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(prior_score(task, Schedule{}, Vector::Zero(3), 0.5), std::invalid_argument);
}

TEST_CASE("analytic scores match finite differences of the closed-form densities") {
  const Schedule s;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ut(1e-5, 1.0);
  for (auto kind : {TaskKind::gaussian, TaskKind::gmm_prior, TaskKind::gmm_likelihood}) {
    CAPTURE(to_string(kind));
    TaskParams p;
    p.kind = kind;
    p.dim = kind == TaskKind::gmm_likelihood ? 10 : (kind == TaskKind::gmm_prior ? 2 : 5);
    const Task task = make_task(p, 5, 3);
    std::uniform_int_distribution<int> ui(0, static_cast<int>(task.n()) - 1);
    for (int probe = 0; probe < 50; ++probe) {
      const double t = ut(rng);
      const int i = ui(rng);
      const Vector th = oracle::random_vec(rng, task.dim, 1.5);
      const auto post = oracle::diffuse(oracle::individual_posterior(task, task.observations[static_cast<std::size_t>(i)]), t);
      CHECK(rel_err(individual_posterior_score(task, s, i, th, t), oracle::central_diff(post, th)) < 1e-5);
      const auto prior = oracle::diffuse(oracle::prior_of(task), t);
      CHECK(rel_err(prior_score(task, s, th, t), oracle::central_diff(prior, th)) < 1e-5);
    }
  }
}

TEST_CASE("gaussian individual score equals the diffused posterior Gaussian score") {
  const Schedule s;
  TaskParams p;
  p.dim = 4;
  const Task task = make_task(p, 6, 5);
  std::mt19937_64 rng(9);
  for (int probe = 0; probe < 30; ++probe) {
    const double t = (probe + 0.5) / 30.0;
    const Index i = probe % task.n();
    const auto pm = posterior_moments(task, i);
    const double a = alpha(s, t);
    const Matrix c = a * pm.cov + v(s, t) * Matrix::Identity(4, 4);
    const Vector th = oracle::random_vec(rng, 4);
    const Vector want = -c.inverse() * (th - std::sqrt(a) * pm.mean);
    CHECK((individual_posterior_score(task, s, i, th, t) - want).norm() < 1e-10);
  }
}

TEST_CASE("mixture responsibilities sum to one") {
  const Schedule s;
  TaskParams p;
  p.kind = TaskKind::gmm_likelihood;
  p.dim = 3;
  const Task task = make_task(p, 3, 2);
  std::mt19937_64 rng(1);
  for (int probe = 0; probe < 50; ++probe) {
    const double t = (probe + 1) / 51.0;
    const auto mix = individual_posterior(task, probe % 3).diffused(s, t);
    const Vector r = mix.responsibilities(oracle::random_vec(rng, 3, 3.0));
    CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.minCoeff() >= 0.0);
  }
}

TEST_CASE("posterior mixture weights agree with the oracle") {
  for (auto kind : {TaskKind::gmm_prior, TaskKind::gmm_likelihood}) {
    TaskParams p;
    p.kind = kind;
    p.dim = 3;
    const Task task = make_task(p, 4, 8);
    for (Index i = 0; i < task.n(); ++i) {
      const auto want = oracle::individual_posterior(task, task.observations[static_cast<std::size_t>(i)]);
      const auto got = individual_posterior(task, i);
      REQUIRE(got.size() == want.size());
      for (std::size_t c = 0; c < want.size(); ++c) {
        CHECK(std::exp(got.components()[c].log_weight) == doctest::Approx(want[c].w).epsilon(1e-10));
        CHECK((got.components()[c].mean - want[c].mu).norm() < 1e-10);
        CHECK((got.components()[c].cov - want[c].cov).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("gaussian joint posterior matches conjugacy") {
  TaskParams p;
  p.dim = 3;
  const Task task = make_task(p, 7, 4);
  const auto want = oracle::gaussian_joint_posterior(task.base_cov, task.observations);
  const auto pm = posterior_moments(task, std::nullopt);
  CHECK((pm.mean - want.mu).norm() < 1e-12);
  CHECK((pm.cov - want.cov).norm() < 1e-12);
  // enumeration route agrees
  const auto jp = joint_posterior(task, 4096);
  REQUIRE(jp.size() == 1);
  CHECK((jp.components()[0].mean - want.mu).norm() < 1e-10);
  CHECK((jp.components()[0].cov - want.cov).norm() < 1e-10);
}

TEST_CASE("enumerated joint posterior matches brute-force density for gmm likelihood") {
  TaskParams p;
  p.kind = TaskKind::gmm_likelihood;
  p.dim = 2;
  const Task task = make_task(p, 3, 6);
  const auto jp = joint_posterior(task, 4096);
  CHECK(jp.size() == 8);
  // unnormalized log p(theta) + sum_i log p(x_i | theta), compared up to a constant
  auto unnorm = [&](const Vector& th) {
    double l = oracle::log_normal(th, Vector::Zero(2), Matrix::Identity(2, 2));
    for (const auto& x : task.observations) {
      std::vector<oracle::Comp> lik;
      for (const auto& c : task.likelihood) lik.push_back({c.weight, th, c.cov});
      l += oracle::mixture_log_pdf(lik, x);
    }
    return l;
  };
  std::mt19937_64 rng(3);
  const Vector th0 = oracle::random_vec(rng, 2);
  const double c0 = jp.log_pdf(th0) - unnorm(th0);
  for (int k = 0; k < 20; ++k) {
    const Vector th = oracle::random_vec(rng, 2);
    CHECK(jp.log_pdf(th) - unnorm(th) == doctest::Approx(c0).epsilon(1e-9));
  }
}

TEST_CASE("component cap is enforced") {
  TaskParams p;
  p.kind = TaskKind::gmm_likelihood;
  p.dim = 2;
  const Task task = make_task(p, 13, 6);
  CHECK_THROWS_AS(joint_posterior(task, 4096), std::length_error);
  CHECK_THROWS_AS(exact_posterior_sample(task, 10, 1, 4096), std::length_error);
  CHECK_NOTHROW(joint_posterior(with_first_observations(task, 12), 4096));
}

TEST_CASE("exact gaussian posterior samples: mean within the CLT bound") {
  TaskParams p;
  p.dim = 3;
  const Task task = make_task(p, 5, 12);
  const auto pm = posterior_moments(task, std::nullopt);
  const SampleSet s = exact_posterior_sample(task, 4096, 77);
  CHECK(s.count() == 4096);
  const Vector mean = s.points.colwise().mean().transpose();
  for (Index k = 0; k < 3; ++k) CHECK(std::abs(mean(k) - pm.mean(k)) < 4.0 * std::sqrt(pm.cov(k, k) / 4096.0));
}

TEST_CASE("exact posterior sampling is reproducible") {
  TaskParams p;
  const Task task = make_task(p, 3, 2);
  const auto a = exact_posterior_sample(task, 1, 5);
  const auto b = exact_posterior_sample(task, 1, 5);
  CHECK(a.points == b.points);
  CHECK(exact_posterior_sample(task, 1, 6).points != a.points);
  CHECK_THROWS_AS(exact_posterior_sample(task, 0, 5), std::invalid_argument);
}

TEST_CASE("gmm prior mode fraction matches the exact weight") {
  Vector x(2);
  x << 2.2, 2.0;
  const Task task = symmetric_gmm_prior_task(x, 2.0, 0.3);
  const auto mix = joint_posterior(task, 4096);
  const double w = mix.weights()[0];
  const Index count = 20000;
  const SampleSet s = exact_posterior_sample(task, count, 31);
  int near1 = 0;
  for (Index j = 0; j < count; ++j) near1 += s.points(j, 0) + s.points(j, 1) > 0.0;
  const double frac = static_cast<double>(near1) / count;
  CHECK(std::abs(frac - w) <= 3.0 * std::sqrt(w * (1.0 - w) / count) + 1e-12);
  CHECK(w > 0.5);
}

TEST_CASE("observations are drawn per seed and prefix-consistent") {
  TaskParams p;
  p.dim = 5;
  const Task big = make_task(p, 30, 3);
  const Task small = make_task(p, 10, 3);
  CHECK(big.base_cov == small.base_cov);
  for (int i = 0; i < 10; ++i) CHECK(big.observations[i] == small.observations[i]);
  const Task other = make_task(p, 10, 4);
  CHECK(other.observations[0] != small.observations[0]);
  const auto [lo, hi] = std::pair{Eigen::SelfAdjointEigenSolver<Matrix>(big.base_cov).eigenvalues().minCoeff(),
                                  Eigen::SelfAdjointEigenSolver<Matrix>(big.base_cov).eigenvalues().maxCoeff()};
  CHECK(lo >= 0.6 - 1e-12);
  CHECK(hi <= 1.4 + 1e-12);
}

TEST_CASE("gmm likelihood defaults") {
  TaskParams p;
  p.kind = TaskKind::gmm_likelihood;
  p.dim = 5;
  const Task task = make_task(p, 2, 0);
  const Vector diag = task.base_cov.diagonal();
  CHECK(diag(0) == doctest::Approx(0.6));
  CHECK(diag(4) == doctest::Approx(1.4));
  CHECK(diag(2) == doctest::Approx(1.0));
  REQUIRE(task.likelihood.size() == 2);
  CHECK((task.likelihood[0].cov - task.base_cov / 9.0).norm() < 1e-14);
  CHECK((task.likelihood[1].cov - 2.25 * task.base_cov).norm() < 1e-14);
}

TEST_CASE("task parameter validation") {
  TaskParams p;
  p.kind = TaskKind::gmm_prior;
  p.prior_weights = {0.3, 0.3};
  CHECK_THROWS_AS(make_task(p, 2, 0), std::invalid_argument);
  TaskParams q;
  q.lik_eig_lo = -1.0;
  CHECK_THROWS_AS(make_task(q, 2, 0), std::invalid_argument);
  Task t = make_task(TaskParams{}, 2, 0);
  t.observations.push_back(Vector::Zero(3));
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("batched mixture scores agree with single evaluations") {
  TaskParams p;
  p.kind = TaskKind::gmm_prior;
  const Task task = make_task(p, 3, 2);
  const Schedule s;
  const auto field = posterior_field(task, 1, s);
  std::mt19937_64 rng(5);
  Matrix th(2, 17);
  for (Index j = 0; j < 17; ++j) th.col(j) = oracle::random_vec(rng, 2, 2.0);
  Matrix out(2, 17);
  field->evaluate(th, 0.4, out);
  for (Index j = 0; j < 17; ++j) CHECK((out.col(j) - individual_posterior_score(task, s, 1, th.col(j), 0.4)).norm() < 1e-12);
}
