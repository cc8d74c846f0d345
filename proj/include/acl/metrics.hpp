#pragma once

#include "acl/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace acl {

enum class W2Method { exact_assignment, sliced };

std::string_view to_string(W2Method m);

struct W2Report {
  double value = 0.0;
  W2Method method = W2Method::exact_assignment;
  Index size_a = 0;
  Index size_b = 0;
  std::optional<std::uint64_t> subsample_seed;  // set when either side was subsampled
};

/// Exact empirical W2 by optimal assignment. Sets larger than `cap` (or of
/// unequal size) are subsampled to min(cap, sizes) points; the indices kept
/// depend only on (seed, set size).
W2Report empirical_w2(const PointMatrix& a, const PointMatrix& b, Index cap = 1024, std::uint64_t seed = 0);
W2Report empirical_w2(const SampleSet& a, const SampleSet& b, Index cap = 1024, std::uint64_t seed = 0);

/// Mean over random unit directions of the 1-D W2 between projections.
W2Report sliced_w2(const PointMatrix& a, const PointMatrix& b, int projections, std::uint64_t seed);
W2Report sliced_w2(const SampleSet& a, const SampleSet& b, int projections, std::uint64_t seed);

/// Minimum-cost perfect matching of a square cost matrix; returns row -> column.
std::vector<Index> solve_assignment(const Matrix& cost);

/// Seeded choice of m distinct indices out of n, in increasing order.
std::vector<Index> subsample_indices(Index n, Index m, std::uint64_t seed);

}  // namespace acl
