// Central finite differences against the analytic gradient.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mhne/training.hpp"

namespace gradcheck {

inline constexpr std::array<const char*, 6> kClasses = {"I", "A", "rho", "theta", "W", "a_vec"};

struct Result {
  std::array<double, 6> max_rel{};   // per parameter class
  std::array<std::size_t, 6> count{};
  double worst() const { return *std::max_element(max_rel.begin(), max_rel.end()); }
};

// |a - n| / max(|a|, |n|, floor)
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline Result check(const mhne::ModelParams& params, const mhne::LossSample& s, double step = 1e-5) {
  mhne::ModelParams p = params;
  const auto g = mhne::gradients(p, s);
  const std::size_t m = p.m(), K = p.K();
  Result r;
  auto fd = [&](double& x) {
    const double saved = x;
    x = saved + step;
    const double up = mhne::sample_loss(p, s);
    x = saved - step;
    const double down = mhne::sample_loss(p, s);
    x = saved;
    return (up - down) / (2 * step);
  };
  auto record = [&](std::size_t cls, double analytic, double numeric) {
    r.max_rel[cls] = std::max(r.max_rel[cls], rel_error(analytic, numeric));
    ++r.count[cls];
  };
  for (std::size_t n = 0; n < p.node_count; ++n) {
    const auto u = static_cast<mhne::NodeId>(n);
    for (std::size_t i = 0; i < m; ++i) record(0, g.I_at(u, i), fd(p.identity[n * m + i]));
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < m; ++i) record(1, g.A_at(u, k, i), fd(p.aspect[(n * K + k) * m + i]));
    }
    record(2, g.rho_at(u), fd(p.rho[n]));
    record(3, g.theta_at(u), fd(p.theta[n]));
  }
  for (std::size_t i = 0; i < p.W.size(); ++i) record(4, g.W()[i], fd(p.W[i]));
  for (std::size_t i = 0; i < p.a_vec.size(); ++i) record(5, g.a_vec()[i], fd(p.a_vec[i]));
  return r;
}

}  // namespace gradcheck
