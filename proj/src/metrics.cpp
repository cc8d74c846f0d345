#include "acl/metrics.hpp"

#include "acl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace acl {

namespace {

constexpr std::uint64_t kSubsampleStream = 0x5AB5;
constexpr std::uint64_t kSliceStream = 0x511CE;

void check_pair(const PointMatrix& a, const PointMatrix& b) {
  if (a.rows() < 1 || b.rows() < 1) throw std::invalid_argument("W2 needs non-empty sample sets");
  if (a.cols() != b.cols()) throw std::invalid_argument("W2 sample sets differ in dimension");
}

PointMatrix take_rows(const PointMatrix& p, const std::vector<Index>& idx) {
  PointMatrix out(static_cast<Index>(idx.size()), p.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Index>(r)) = p.row(idx[r]);
  return out;
}

// 1-D W2^2 between two empirical measures via their quantile functions.
double w2_sq_1d(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  if (x.size() == y.size()) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - y[i]) * (x[i] - y[i]);
    std::sort(sq.begin(), sq.end());
    return std::accumulate(sq.begin(), sq.end(), 0.0) / nx;
  }
  double total = 0.0;
  double u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double ux = static_cast<double>(i + 1) / nx;
    const double uy = static_cast<double>(j + 1) / ny;
    const double next = std::min(ux, uy);
    total += (next - u) * (x[i] - y[j]) * (x[i] - y[j]);
    u = next;
    if (ux <= next) ++i;
    if (uy <= next) ++j;
  }
  return total;
}

}  // namespace

std::string_view to_string(W2Method m) { return m == W2Method::sliced ? "sliced" : "exact_assignment"; }

std::vector<Index> subsample_indices(Index n, Index m, std::uint64_t seed) {
  if (m < 0 || m > n) throw std::invalid_argument("cannot subsample more points than available");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  const CounterStream rng{seed, kSubsampleStream, static_cast<std::uint64_t>(n)};
  for (Index i = 0; i < m; ++i) {
    const auto span = static_cast<std::uint64_t>(n - i);
    const Index j = i + static_cast<Index>(rng.bits(static_cast<std::uint64_t>(i)) % span);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  perm.resize(static_cast<std::size_t>(m));
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<Index> solve_assignment(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("assignment needs a square cost matrix");
  if (n == 0) return {};
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> c(un * un);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) c[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)] = cost(i, j);
  }
  // shortest augmenting paths with row/column potentials; 1-based with a
  // virtual column 0
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(un + 1, 0.0), v(un + 1, 0.0), minv(un + 1);
  std::vector<std::size_t> p(un + 1, 0), way(un + 1, 0);
  std::vector<char> used(un + 1);
  for (std::size_t i = 1; i <= un; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const double* row = &c[(i0 - 1) * un];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= un; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= un; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> match(un);
  for (std::size_t j = 1; j <= un; ++j) match[p[j] - 1] = static_cast<Index>(j - 1);
  return match;
}

W2Report empirical_w2(const PointMatrix& a, const PointMatrix& b, Index cap, std::uint64_t seed) {
  check_pair(a, b);
  if (cap < 1) throw std::invalid_argument("W2 cap must be >= 1");
  W2Report rep;
  rep.method = W2Method::exact_assignment;
  const Index m = std::min({cap, a.rows(), b.rows()});
  const bool sub = m != a.rows() || m != b.rows();
  PointMatrix sa, sb;
  const PointMatrix* pa = &a;
  const PointMatrix* pb = &b;
  if (sub) {
    rep.subsample_seed = seed;
    if (a.rows() != m) {
      sa = take_rows(a, subsample_indices(a.rows(), m, seed));
      pa = &sa;
    }
    if (b.rows() != m) {
      sb = take_rows(b, subsample_indices(b.rows(), m, seed));
      pb = &sb;
    }
  }
  rep.size_a = pa->rows();
  rep.size_b = pb->rows();

  // squared distances via |x|^2 + |y|^2 - 2 x.y, clamped at zero
  const Vector na = pa->rowwise().squaredNorm();
  const Vector nb = pb->rowwise().squaredNorm();
  Matrix cost = -2.0 * (*pa) * pb->transpose();
  cost.colwise() += na;
  cost.rowwise() += nb.transpose();
  cost = cost.cwiseMax(0.0);

  const auto match = solve_assignment(cost);
  std::vector<double> matched(match.size());
  for (std::size_t i = 0; i < match.size(); ++i) {
    matched[i] = (pa->row(static_cast<Index>(i)) - pb->row(match[i])).squaredNorm();
  }
  std::sort(matched.begin(), matched.end());
  rep.value = std::sqrt(std::accumulate(matched.begin(), matched.end(), 0.0) / static_cast<double>(m));
  return rep;
}

W2Report empirical_w2(const SampleSet& a, const SampleSet& b, Index cap, std::uint64_t seed) {
  return empirical_w2(a.points, b.points, cap, seed);
}

W2Report sliced_w2(const PointMatrix& a, const PointMatrix& b, int projections, std::uint64_t seed) {
  check_pair(a, b);
  if (projections < 1) throw std::invalid_argument("sliced W2 needs at least one projection");
  const Index d = a.cols();
  double acc = 0.0;
  std::vector<double> dir(static_cast<std::size_t>(d));
  for (int k = 0; k < projections; ++k) {
    const CounterStream rng{seed, kSliceStream, static_cast<std::uint64_t>(k)};
    rng.normals(0, dir.size(), dir.begin());
    Eigen::Map<Vector> u(dir.data(), d);
    const double norm = u.norm();
    if (norm > 0.0) u /= norm;
    else u(0) = 1.0;
    const Vector pa = a * u;
    const Vector pb = b * u;
    acc += std::sqrt(w2_sq_1d({pa.data(), pa.data() + pa.size()}, {pb.data(), pb.data() + pb.size()}));
  }
  W2Report rep;
  rep.method = W2Method::sliced;
  rep.size_a = a.rows();
  rep.size_b = b.rows();
  rep.subsample_seed = seed;
  rep.value = acc / projections;
  return rep;
}

W2Report sliced_w2(const SampleSet& a, const SampleSet& b, int projections, std::uint64_t seed) {
  return sliced_w2(a.points, b.points, projections, seed);
}

}  // namespace acl
