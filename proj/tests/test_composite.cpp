#include "acl/composite.hpp"
#include "acl/theory.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace acl;

namespace {

Task gaussian_task(Index d, Index n, std::uint64_t seed) {
  TaskParams p;
  p.dim = d;
  return make_task(p, n, seed);
}

Vector joint_score_oracle(const Task& task, const Vector& th, double t) {
  const auto jp = oracle::gaussian_joint_posterior(task.base_cov, task.observations);
  const double a = oracle::alpha(t);
  const Index d = task.dim;
  const Matrix c = a * jp.cov + (1.0 - a) * Matrix::Identity(d, d);
  return -c.inverse() * (th - std::sqrt(a) * jp.mu);
}

}  // namespace

TEST_CASE("geffner with one observation passes the posterior score through") {
  const Schedule s;
  const Task task = gaussian_task(3, 1, 2);
  const auto spec = make_spec(task, Method::geffner, s);
  const auto prior = prior_field(task, s);
  const auto posts = posterior_fields(task, s);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vector th = oracle::random_vec(rng, 3);
    const double t = 0.05 + 0.09 * k;
    CHECK(geffner_score(spec, *prior, posts, th, t) == (*posts[0])(th, t));
    CHECK((linhart_score(make_spec(task, Method::linhart, s), *prior, posts, th, t) - (*posts[0])(th, t)).norm() < 1e-12);
  }
}

TEST_CASE("geffner score equals the closed-form bridging score") {
  const Schedule s;
  const Task task = gaussian_task(4, 6, 3);
  const auto spec = make_spec(task, Method::geffner, s);
  const auto prior = prior_field(task, s);
  const auto posts = posterior_fields(task, s);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 40; ++k) {
    const double t = 1e-5 + k / 40.0;
    const Vector th = oracle::random_vec(rng, 4);
    const auto b = oracle::geffner_bridge(task.base_cov, task.observations, t);
    const Vector want = -b.cov.inverse() * (th - b.mu);
    CHECK((geffner_score(spec, *prior, posts, th, t) - want).norm() < 1e-8);
  }
}

TEST_CASE("zero input fields give a zero composite") {
  const Schedule s;
  const Task task = gaussian_task(2, 3, 1);
  auto zero = std::make_shared<AffineScoreField>(Matrix::Zero(2, 2), Vector::Zero(2));
  std::vector<ScoreFieldPtr> posts(3, zero);
  for (auto m : {Method::geffner, Method::linhart}) {
    const auto spec = make_spec(task, m, s);
    const Vector out = m == Method::geffner ? geffner_score(spec, *zero, posts, Vector::Ones(2), 0.3)
                                            : linhart_score(spec, *zero, posts, Vector::Ones(2), 0.3);
    CHECK(out.norm() == 0.0);
  }
}

TEST_CASE("field count mismatch is rejected") {
  const Schedule s;
  const Task task = gaussian_task(2, 3, 1);
  const auto spec = make_spec(task, Method::geffner, s);
  auto posts = posterior_fields(task, s);
  posts.pop_back();
  CHECK_THROWS_AS(geffner_score(spec, *prior_field(task, s), posts, Vector::Zero(2), 0.5), std::invalid_argument);
}

TEST_CASE("diffuse_covariance") {
  const Schedule s;
  Matrix c(2, 2);
  c << 2.0, 0.3, 0.3, 0.5;
  CHECK((diffuse_covariance(c, 0.0, s) - c).norm() < 1e-15);
  CHECK((diffuse_covariance(c, 1.0, s) - Matrix::Identity(2, 2)).norm() < 2.0 * 4.4e-5);
  // alpha_t = 0.5: solve for t under the default schedule
  const double t = (-0.1 + std::sqrt(0.01 + 2.0 * 19.9 * std::log(2.0))) / 19.9;
  CHECK(alpha(s, t) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((diffuse_covariance(0.5 * Matrix::Identity(3, 3), t, s) - 0.75 * Matrix::Identity(3, 3)).norm() < 1e-12);
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(diffuse_covariance(bad, 0.5, s), std::invalid_argument);
}

TEST_CASE("lambda matrix") {
  const Schedule s;
  CompositeSpec spec;
  spec.method = Method::linhart;
  spec.schedule = s;
  spec.rule = ProxyRule::diffused_marginal;
  spec.n = 1;
  spec.prior_base = Matrix::Identity(2, 2);
  Matrix c(2, 2);
  c << 1.5, 0.2, 0.2, 0.7;
  spec.post_base = {c};
  const double t = 0.4;
  CHECK((lambda_matrix(spec, t) - diffuse_covariance(c, t, s).inverse()).norm() < 1e-12);

  // all proxies identity -> Lambda = I
  spec.n = 4;
  spec.post_base.assign(4, Matrix::Identity(2, 2));
  CHECK((lambda_matrix(spec, t) - Matrix::Identity(2, 2)).norm() < 1e-12);

  // proxies that make Lambda indefinite are a tuning failure
  spec.post_base.assign(4, 4.0 * Matrix::Identity(2, 2));
  spec.prior_base = 0.1 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(lambda_matrix(spec, 0.01), TuningError);
}

TEST_CASE("linhart score reproduces the diffused joint posterior score") {
  const Schedule s;
  std::mt19937_64 rng(7);
  for (Index d : {1, 2, 5}) {
    for (Index n : {2, 7, 30}) {
      const Task task = gaussian_task(d, n, 10 + static_cast<std::uint64_t>(d * n));
      const auto spec = make_spec(task, Method::linhart, s);
      const auto prior = prior_field(task, s);
      const auto posts = posterior_fields(task, s);
      for (int k = 0; k < 25; ++k) {
        std::uniform_real_distribution<double> ut(1e-5, 1.0);
        const double t = ut(rng);
        const Vector th = oracle::random_vec(rng, d, 1.5);
        CHECK((linhart_score(spec, *prior, posts, th, t) - joint_score_oracle(task, th, t)).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("the diffused-marginal rule is not exact on Gaussians") {
  // scalar counterexample: C = 0.5 for each posterior, n = 2, t = 0 limit
  const Schedule s;
  Task task;
  task.kind = TaskKind::gaussian;
  task.dim = 1;
  task.prior = GaussianMixture::single({Vector::Zero(1), Matrix::Identity(1, 1)});
  task.base_cov = Matrix::Identity(1, 1);
  task.likelihood = {{1.0, task.base_cov}};
  task.observations = {Vector::Zero(1), Vector::Zero(1)};
  const auto prior = prior_field(task, s);
  const auto posts = posterior_fields(task, s);
  const double t = 1e-6;
  Vector th(1);
  th << 1.0;
  const auto exact = make_spec(task, Method::linhart, s, ProxyRule::backward_kernel);
  const auto marginal = make_spec(task, Method::linhart, s, ProxyRule::diffused_marginal);
  CHECK(linhart_score(exact, *prior, posts, th, t)(0) == doctest::Approx(-3.0).epsilon(1e-4));
  CHECK(linhart_score(marginal, *prior, posts, th, t)(0) == doctest::Approx(-7.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("identical isotropic proxies reduce linhart to geffner") {
  const Schedule s;
  const Task task = gaussian_task(3, 4, 5);
  CompositeSpec spec;
  spec.method = Method::linhart;
  spec.n = 4;
  spec.schedule = s;
  spec.prior_base = 0.8 * Matrix::Identity(3, 3);
  spec.post_base.assign(4, 0.8 * Matrix::Identity(3, 3));
  const auto prior = prior_field(task, s);
  const auto posts = posterior_fields(task, s);
  auto gspec = spec;
  gspec.method = Method::geffner;
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const double t = 0.02 + k * 0.045;
    const Vector th = oracle::random_vec(rng, 3);
    CHECK((linhart_score(spec, *prior, posts, th, t) - geffner_score(gspec, *prior, posts, th, t)).norm() < 1e-10);
  }
}

TEST_CASE("composite scores are linear in their input fields") {
  const Schedule s;
  const Task task = gaussian_task(3, 3, 9);
  std::mt19937_64 rng(11);
  auto rand_field = [&] {
    return std::make_shared<AffineScoreField>(oracle::random_spd(rng, 3), oracle::random_vec(rng, 3));
  };
  std::vector<ScoreFieldPtr> f1, f2, fs;
  const auto p1 = rand_field();
  const auto p2 = rand_field();
  for (int i = 0; i < 3; ++i) {
    f1.push_back(rand_field());
    f2.push_back(rand_field());
  }
  const double a = 0.7, b = -1.3;
  auto combo = [&](const ScoreFieldPtr& x, const ScoreFieldPtr& y) {
    return std::make_shared<FunctionScoreField>(3, [=](const Vector& th, double t) { return Vector(a * (*x)(th, t) + b * (*y)(th, t)); });
  };
  for (int i = 0; i < 3; ++i) fs.push_back(combo(f1[i], f2[i]));
  const auto ps = combo(p1, p2);
  for (auto m : {Method::geffner, Method::linhart}) {
    const auto spec = make_spec(task, m, s);
    auto eval = [&](const ScoreField& p, const std::vector<ScoreFieldPtr>& f, const Vector& th, double t) {
      return m == Method::geffner ? geffner_score(spec, p, f, th, t) : linhart_score(spec, p, f, th, t);
    };
    for (int k = 0; k < 10; ++k) {
      const Vector th = oracle::random_vec(rng, 3);
      const double t = 0.1 + 0.08 * k;
      const Vector lhs = eval(*ps, fs, th, t);
      const Vector rhs = a * eval(*p1, f1, th, t) + b * eval(*p2, f2, th, t);
      CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("compose_dsm_error") {
  CHECK(compose_dsm_error(0.1, 0.2, 3, Method::geffner) == doctest::Approx(0.8));
  CHECK(compose_dsm_error(0.1, 0.2, 3, Method::linhart) == doctest::Approx(0.8));
  CHECK(compose_dsm_error(0.3, 0.2, 1, Method::geffner) == doctest::Approx(0.2));
  CHECK(compose_dsm_error(0.0, 0.0, 5, Method::linhart) == 0.0);
  CHECK_THROWS_AS(compose_dsm_error(-0.1, 0.2, 3, Method::geffner), std::invalid_argument);
}

TEST_CASE("batched composite field agrees with pointwise scores and its affine form") {
  const Schedule s;
  for (auto kind : {TaskKind::gaussian, TaskKind::gmm_prior}) {
    TaskParams p;
    p.kind = kind;
    p.dim = 2;
    const Task task = make_task(p, 5, 3);
    for (auto m : {Method::geffner, Method::linhart}) {
      const auto field = make_composite(task, m, s);
      const auto spec = make_spec(task, m, s);
      const auto prior = prior_field(task, s);
      const auto posts = posterior_fields(task, s);
      std::mt19937_64 rng(8);
      Matrix th(2, 9);
      for (Index j = 0; j < 9; ++j) th.col(j) = oracle::random_vec(rng, 2);
      Matrix out(2, 9);
      field->evaluate(th, 0.35, out);
      for (Index j = 0; j < 9; ++j) {
        const Vector want = m == Method::geffner ? geffner_score(spec, *prior, posts, th.col(j), 0.35)
                                                 : linhart_score(spec, *prior, posts, th.col(j), 0.35);
        CHECK((out.col(j) - want).norm() < 1e-10);
      }
      const auto aff = field->affine_at(0.35);
      CHECK(aff.has_value() == (kind == TaskKind::gaussian));
      if (aff) {
        Matrix viaff = aff->a * th;
        viaff.colwise() += aff->b;
        CHECK((viaff - out).norm() < 1e-9);
      }
    }
  }
}
