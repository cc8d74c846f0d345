#include "acl/schedule.hpp"

#include "acl/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace acl {

std::string_view to_string(Method m) {
  return m == Method::geffner ? "geffner" : "linhart";
}

Method method_from_string(std::string_view s) {
  if (s == "geffner") return Method::geffner;
  if (s == "linhart") return Method::linhart;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

void Schedule::validate() const {
  if (!(beta_min > 0.0) || !(beta_max >= beta_min)) {
    throw std::invalid_argument("schedule requires 0 < beta_min <= beta_max");
  }
  if (!(t_floor > 0.0 && t_floor < 1.0)) {
    throw std::invalid_argument("schedule requires 0 < t_floor < 1");
  }
}

namespace {
void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("diffusion time " + std::to_string(t) + " outside [0, 1]");
  }
}
}  // namespace

double alpha(const Schedule& s, double t) {
  check_time(t);
  return std::exp(-(s.beta_min * t + 0.5 * (s.beta_max - s.beta_min) * t * t));
}

double v(const Schedule& s, double t) {
  check_time(t);
  // -expm1 keeps v_t accurate near t = 0 where alpha_t is close to one.
  return -std::expm1(-(s.beta_min * t + 0.5 * (s.beta_max - s.beta_min) * t * t));
}

LevelGrid levels(const Schedule& s, int T) {
  if (T < 1) throw std::invalid_argument("level count T must be >= 1");
  s.validate();
  LevelGrid grid;
  grid.times.reserve(static_cast<std::size_t>(T) + 1);
  for (int p = 0; p <= T; ++p) {
    grid.times.push_back(std::max(static_cast<double>(p) / T, s.t_floor));
  }
  grid.times.front() = s.t_floor;
  grid.times.back() = 1.0;
  return grid;
}

}  // namespace acl
