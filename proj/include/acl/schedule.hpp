#pragma once

#include <vector>

namespace acl {

/// Variance-preserving forward diffusion with a linear rate
/// beta(s) = beta_min + s (beta_max - beta_min), so that
/// alpha_t = exp(-(beta_min t + (beta_max - beta_min) t^2 / 2)) and v_t = 1 - alpha_t.
struct Schedule {
  double beta_min = 0.1;
  double beta_max = 20.0;
  double t_floor = 1e-5;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct LevelGrid {
  std::vector<double> times;  // T + 1 entries, t_floor first, 1 last

  int levels() const { return static_cast<int>(times.size()) - 1; }
};

double alpha(const Schedule& s, double t);
double v(const Schedule& s, double t);

/// Uniform grid {max(p/T, t_floor)}, p = 0..T.
LevelGrid levels(const Schedule& s, int T);

}  // namespace acl
