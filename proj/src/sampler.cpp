#include "acl/sampler.hpp"

#include "acl/rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace acl {

namespace {

constexpr std::uint64_t kStartStream = 0x57A27;

using ChainMap = Eigen::Map<Matrix>;

// Runs fn(chunk_index) for every chunk on up to `workers` threads. If any
// chunk throws, the exception of the lowest failing chunk is rethrown.
template <typename Fn>
void for_chunks(Index chunks, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const Index c = next.fetch_add(1);
      if (c >= chunks || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
        failed = true;
      }
    }
  };
  const int n_threads = static_cast<int>(std::min<Index>(std::max(1, workers), chunks));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

SampleSet gaussian_start(Index count, Index dim, std::uint64_t seed, double level) {
  if (count < 1 || dim < 1) throw std::invalid_argument("start set needs count >= 1 and dim >= 1");
  SampleSet out;
  out.points.resize(count, dim);
  for (Index j = 0; j < count; ++j) {
    const CounterStream rng{seed, kStartStream, static_cast<std::uint64_t>(j)};
    rng.normals(0, static_cast<std::size_t>(dim), out.points.row(j).data());
  }
  out.level = level;
  out.seed = seed;
  return out;
}

SampleSet ula_chain(const ScoreField& score, const SampleSet& start, double h, long long k, double t,
                    std::uint64_t seed, int level, const SamplerOptions& opts) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (k < 0) throw std::invalid_argument("step count must be >= 0");
  if (start.count() < 1) throw std::invalid_argument("start set is empty");
  if (start.dim() != score.dim()) throw std::invalid_argument("start set dimension does not match score field");
  if (opts.chunk < 1) throw std::invalid_argument("chunk size must be >= 1");

  SampleSet out = start;
  out.level = t;
  out.seed = seed;
  out.steps_used = start.steps_used + k;
  if (k == 0) return out;

  const Index d = out.dim();
  const Index count = out.count();
  const std::uint64_t stride = static_cast<std::uint64_t>(d + (d & 1));  // keep normal pairs aligned per step
  const double noise = std::sqrt(2.0 * h);
  const auto affine = score.affine_at(t);
  ChainMap chains(out.points.data(), d, count);

  const Index chunks = (count + opts.chunk - 1) / opts.chunk;
  for_chunks(chunks, opts.workers, [&](Index c) {
    const Index c0 = c * opts.chunk;
    const Index width = std::min(opts.chunk, count - c0);
    std::vector<CounterStream> streams;
    streams.reserve(static_cast<std::size_t>(width));
    for (Index j = 0; j < width; ++j) {
      streams.push_back(CounterStream{seed, static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(c0 + j)});
    }
    Matrix x = chains.middleCols(c0, width);
    Matrix s(d, width);
    Matrix z(d, width);
    for (long long i = 0; i < k; ++i) {
      if (affine) {
        s.noalias() = affine->a * x;
        s.colwise() += affine->b;
      } else {
        score.evaluate(x, t, s);
      }
      if (!s.allFinite()) throw SamplerError("score returned a non-finite value", level, i);
      const std::uint64_t first = static_cast<std::uint64_t>(i) * stride;
      for (Index j = 0; j < width; ++j) streams[static_cast<std::size_t>(j)].normals(first, static_cast<std::size_t>(d), z.col(j).data());
      x += h * s + noise * z;
      if (!(x.cwiseAbs().maxCoeff() <= opts.divergence_limit)) {
        throw SamplerError("chain diverged beyond " + std::to_string(opts.divergence_limit), level, i);
      }
    }
    chains.middleCols(c0, width) = x;
  });
  return out;
}

SampleSet annealed_sample(const LevelPlan& plan, const ScoreFactory& factory, Index count, std::uint64_t seed,
                          const SamplerOptions& opts) {
  if (plan.levels.empty()) throw std::invalid_argument("plan has no levels");
  SampleSet cur = gaussian_start(count, plan.dim, seed, plan.t_end);
  for (int p = plan.size() - 1; p >= 0; --p) {
    const auto& l = plan.levels[static_cast<std::size_t>(p)];
    const ScoreFieldPtr field = factory(p, l.t);
    if (!field) throw std::invalid_argument("score factory returned null");
    cur = ula_chain(*field, cur, l.h, l.k, l.t, seed, p, opts);
  }
  return cur;
}

SampleSet annealed_sample(const LevelPlan& plan, ScoreFieldPtr composite, Index count, std::uint64_t seed,
                          const SamplerOptions& opts) {
  return annealed_sample(plan, [&](int, double) { return composite; }, count, seed, opts);
}

}  // namespace acl
