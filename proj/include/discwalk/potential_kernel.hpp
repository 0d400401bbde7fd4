#pragma once

// Potential kernel a(x) = lim_t sum_{j<=t} [p_j(0) - p_j(x)].
//
// Partial sums S_T = sum_{j<T} p_j are built by doubling on a zero-padded
// grid: S_2T = S_T + p_T * S_T and p_2T = p_T * p_T. The parity average
// A_T = S_T + p_T / 2 removes the period-two oscillation of bipartite walks,
// and one Richardson step per doubling (R_T = 2 A_2T - A_T) removes the 1/T
// tail. The reported oscillation is |R_T - R_{T/2}| at the last level.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain.hpp"
#include "step_law.hpp"

namespace discwalk {

class GridTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PotentialKernelOptions {
  /// Grid radius override; must reach the no-aliasing minimum.
  std::optional<std::int64_t> grid_radius;
  /// Half-widths of the grid in units of sqrt(gamma^2 t_max). Must be >= 2.
  double spread = 3.0;
  /// Results whose oscillation exceeds 10x this are flagged.
  double tolerance = 1e-3;
};

struct PotentialKernelTable {
  std::map<Point, double> values;
  std::int64_t t_max = 0;
  std::int64_t grid_radius = 0;
  std::vector<double> oscillation;  // per doubling level, max over points
  bool flagged = false;

  double at(Point x) const {
    auto it = values.find(x);
    if (it == values.end()) throw std::out_of_range("potential kernel not computed at " + to_string(x));
    return it->second;
  }
  double last_oscillation() const { return oscillation.empty() ? 0.0 : oscillation.back(); }
};

/// Smallest grid radius satisfying the no-aliasing rule
/// R >= 2 sqrt(gamma^2 t_max) + |x|_max.
inline std::int64_t potential_kernel_min_radius(double gamma_sq, std::int64_t t_max, std::int64_t xmax) {
  return static_cast<std::int64_t>(std::ceil(2.0 * std::sqrt(gamma_sq * static_cast<double>(t_max)))) + xmax;
}

inline PotentialKernelTable potential_kernel(const StepLaw& law, const std::vector<Point>& points, std::int64_t t_max,
                                             PotentialKernelOptions opt = {}) {
  if (t_max < 1) throw std::invalid_argument("potential_kernel requires t_max >= 1");
  if (opt.spread < 2.0) throw std::invalid_argument("potential_kernel spread must be >= 2");
  const LawStats st = validate(law);
  std::int64_t T_final = 1;
  while (T_final < t_max) T_final *= 2;

  std::int64_t xmax = 0;
  for (auto p : points) xmax = std::max({xmax, std::abs(p.x1), std::abs(p.x2)});
  const std::int64_t need = potential_kernel_min_radius(st.gamma_sq, T_final, xmax);
  std::int64_t R = static_cast<std::int64_t>(std::ceil(opt.spread * std::sqrt(st.gamma_sq * static_cast<double>(T_final)))) +
                   xmax + static_cast<std::int64_t>(std::ceil(law.max_step()));
  if (opt.grid_radius) {
    if (*opt.grid_radius < need)
      throw GridTooSmall("grid radius " + std::to_string(*opt.grid_radius) + " < " + std::to_string(need) +
                         " required for t_max=" + std::to_string(T_final));
    R = *opt.grid_radius;
  }

  const std::int64_t W = 2 * R + 1;
  const auto cell = [&](Point p) { return static_cast<std::size_t>((p.x1 + R) * W + (p.x2 + R)); };
  std::vector<double> p(static_cast<std::size_t>(W * W), 0.0);
  std::vector<double> S(p.size(), 0.0);
  for (const auto& a : law.atoms())
    if (std::abs(a.step.x1) <= R && std::abs(a.step.x2) <= R) p[cell(a.step)] += a.mass;
  S[cell({0, 0})] = 1.0;  // S_1 = p_0

  const auto averaged = [&](Point x) {
    const double s0 = S[cell({0, 0})] + 0.5 * p[cell({0, 0})];
    const double sx = S[cell(x)] + 0.5 * p[cell(x)];
    return s0 - sx;
  };

  PotentialKernelTable out;
  out.t_max = T_final;
  out.grid_radius = R;
  std::vector<double> prev_avg, prev_rich;
  const auto record = [&]() {
    std::vector<double> avg;
    for (auto x : points) avg.push_back(averaged(x));
    if (!prev_avg.empty()) {
      std::vector<double> rich(avg.size());
      for (std::size_t i = 0; i < avg.size(); ++i) rich[i] = 2.0 * avg[i] - prev_avg[i];
      if (!prev_rich.empty()) {
        double osc = 0;
        for (std::size_t i = 0; i < rich.size(); ++i) osc = std::max(osc, std::abs(rich[i] - prev_rich[i]));
        out.oscillation.push_back(osc);
      }
      prev_rich = std::move(rich);
    }
    prev_avg = std::move(avg);
  };

  record();
  for (std::int64_t T = 1; T < T_final; T *= 2) {
    // p currently holds p_T and S holds S_T.
    const auto pS = convolve_centered(p, S, R);
    const auto pp = convolve_centered(p, p, R);
    for (std::size_t i = 0; i < S.size(); ++i) S[i] += pS[i];
    p = pp;
    record();
  }

  const std::vector<double>& final_values = prev_rich.empty() ? prev_avg : prev_rich;
  for (std::size_t i = 0; i < points.size(); ++i) out.values[points[i]] = points[i] == Point{0, 0} ? 0.0 : final_values[i];
  out.flagged = out.last_oscillation() > 10.0 * opt.tolerance;
  return out;
}

}  // namespace discwalk
