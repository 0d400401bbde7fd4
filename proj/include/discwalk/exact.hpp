#pragma once

// Exact (to solver tolerance) quantities of absorbing chains: truncated
// Green's functions, exit and entrance times, hitting probabilities and
// distributions, local-time laws, external Green's functions and the
// disc / annulus / outside partition probabilities.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain.hpp"
#include "geometry.hpp"
#include "step_law.hpp"

namespace discwalk {

class OverlappingAbsorbers : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expected visit counts G_A(x,y) before leaving A; zero off A.
class GreenTable {
 public:
  GreenTable(Domain d, std::vector<double> values) : domain_(std::move(d)), values_(std::move(values)) {}

  const Domain& domain() const { return domain_; }
  double operator()(Point x, Point y) const {
    const auto i = domain_.index_of(domain_.ambient().canonical(x));
    const auto j = domain_.index_of(domain_.ambient().canonical(y));
    if (i < 0 || j < 0) return 0.0;
    return at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * domain_.size() + j]; }

 private:
  Domain domain_;
  std::vector<double> values_;
};

inline constexpr std::size_t kGreenTableLimit = 6000;

inline GreenTable green(const AbsorbingChain& chain) {
  const std::size_t n = chain.size();
  if (n > kGreenTableLimit)
    throw DimensionTooLarge("full Green table requested for " + std::to_string(n) + " states (limit " +
                            std::to_string(kGreenTableLimit) + "); use green_column");
  std::vector<double> values(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = chain.solve_unit(j);
    for (std::size_t i = 0; i < n; ++i) values[i * n + j] = col[i];
  }
  return GreenTable(chain.domain(), std::move(values));
}

inline GreenTable green(const StepLaw& law, const Domain& domain, SolverOptions opt = {}) {
  return green(AbsorbingChain(law, domain, opt));
}

/// G_A(., y) as a vector over the domain states (equal to G_A(y, .) by symmetry).
inline std::vector<double> green_column(const AbsorbingChain& chain, Point y) {
  const auto j = chain.domain().index_of(chain.domain().ambient().canonical(y));
  if (j < 0) return std::vector<double>(chain.size(), 0.0);
  return chain.solve_unit(static_cast<std::size_t>(j));
}

/// E^x T_{A^c} for every x in A.
inline std::vector<double> expected_exit_times(const AbsorbingChain& chain) {
  return chain.solve(std::vector<double>(chain.size(), 1.0));
}

inline double value_at(const AbsorbingChain& chain, const std::vector<double>& u, Point x) {
  const auto i = chain.domain().index_of(chain.domain().ambient().canonical(x));
  if (i < 0) throw GeometryError("point " + to_string(x) + " is not in the transient domain");
  return u[static_cast<std::size_t>(i)];
}

inline double expected_exit_time(const StepLaw& law, const Domain& domain, Point x, SolverOptions opt = {}) {
  AbsorbingChain chain(law, domain, opt);
  return value_at(chain, expected_exit_times(chain), x);
}

/// Canonical points of the ambient space outside every absorber. On the
/// plane one absorber must be the complement of a bounded region.
inline std::vector<Point> transient_points(const Ambient& amb, const std::vector<const Region*>& absorbers) {
  const auto absorbed = [&](Point p) {
    return std::any_of(absorbers.begin(), absorbers.end(), [&](const Region* r) { return r->contains(p, amb); });
  };
  std::vector<Point> candidates;
  if (amb.is_torus()) {
    candidates = fundamental_domain(amb.K());
  } else {
    const Region* bounded_complement = nullptr;
    for (const auto* r : absorbers)
      if (r->kind() == Region::Kind::Complement && r->complement().box_radius()) bounded_complement = r;
    if (!bounded_complement)
      throw GeometryError("planar transient set is unbounded: one absorber must be the complement of a bounded region");
    candidates = bounded_complement->complement().enumerate();
  }
  std::vector<Point> out;
  for (auto p : candidates)
    if (!absorbed(p)) out.push_back(p);
  return out;
}

inline void require_disjoint(const Ambient& amb, const Region& a, const Region& b) {
  std::vector<Point> probe;
  if (amb.is_torus()) {
    probe = fundamental_domain(amb.K());
  } else if (a.box_radius()) {
    probe = a.enumerate();
  } else if (b.box_radius()) {
    probe = b.enumerate();
  } else {
    return;  // two unbounded planar sets: overlap would leave no transient domain anyway
  }
  for (auto p : probe)
    if (a.contains(p, amb) && b.contains(p, amb))
      throw OverlappingAbsorbers("target and forbidden sets overlap at " + to_string(p));
}

/// P^x(T_target < T_forbidden) for every transient x.
struct HitBefore {
  AbsorbingChain chain;
  std::vector<double> prob;

  double at(Point x) const { return value_at(chain, prob, x); }
};

inline HitBefore hit_before_all(const StepLaw& law, const Ambient& amb, const Region& target, const Region& forbidden,
                                SolverOptions opt = {}) {
  require_disjoint(amb, target, forbidden);
  Domain dom(amb, transient_points(amb, {&target, &forbidden}));
  AbsorbingChain chain(law, std::move(dom), opt);
  auto rhs = chain.exit_sum([&](Point y) { return target.contains(y, amb) ? 1.0 : 0.0; });
  auto prob = chain.solve(rhs);
  return {std::move(chain), std::move(prob)};
}

inline double hit_before(const StepLaw& law, const Ambient& amb, const Region& target, const Region& forbidden, Point x,
                         SolverOptions opt = {}) {
  const Point cx = amb.canonical(x);
  if (target.contains(cx, amb) || forbidden.contains(cx, amb))
    throw GeometryError("hit_before: start must lie outside target and forbidden sets");
  return hit_before_all(law, amb, target, forbidden, opt).at(cx);
}

/// Law of the first entrance point into `absorbing`.
struct HittingDist {
  Point start;
  std::map<Point, double> mass;

  double total() const {
    double t = 0;
    for (const auto& [p, m] : mass) t += m;
    return t;
  }
  double at(Point y) const {
    auto it = mass.find(y);
    return it == mass.end() ? 0.0 : it->second;
  }
};

/// Last-exit form: H(x,y) = sum_z G_{A^c}(x,z) p(z,y), with one Green column.
inline HittingDist hitting_distribution(const StepLaw& law, const Ambient& amb, const Region& absorbing, Point x,
                                        SolverOptions opt = {}) {
  const Point cx = amb.canonical(x);
  if (absorbing.contains(cx, amb)) throw GeometryError("hitting_distribution: start lies in the absorbing set");
  AbsorbingChain chain(law, Domain(amb, transient_points(amb, {&absorbing})), opt);
  const auto g = green_column(chain, cx);
  HittingDist out{cx, {}};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (g[i] == 0) continue;
    for (const auto& a : chain.kernel().steps) {
      const Point y = chain.land(chain.domain()[i], a);
      if (chain.domain().index_of(y) < 0) out.mass[y] += g[i] * a.mass;
    }
  }
  return out;
}

/// Toral local time at 0̂ before leaving D̂(0,n), started at x̂.
struct LocalTimeLaw {
  double green_x0 = 0;  // Ĝ(x̂,0̂)
  double green_00 = 0;  // Ĝ(0̂,0̂)
  std::vector<double> moments;       // k! Ĝ(x̂,0̂) Ĝ(0̂,0̂)^{k-1}, k = 1..k_max
  std::vector<double> dist_moments;  // E L^k summed from the geometric law

  double entry_prob() const { return green_x0 / green_00; }
  double return_prob() const { return 1.0 - 1.0 / green_00; }

  /// P(L >= m) = q r^{m-1} for m >= 1.
  double tail(double m) const {
    if (m <= 0) return 1.0;
    return entry_prob() * std::pow(return_prob(), std::ceil(m) - 1.0);
  }
};

inline LocalTimeLaw local_time_moments(const StepLaw& law, std::int64_t K, double n, Point x, int k_max,
                                       SolverOptions opt = {}) {
  require_toral_disc(n, K);
  const Ambient amb = Ambient::torus(K);
  const Point cx = amb.canonical(x);
  if (!within_radius(torus_norm2(cx, K), n)) throw GeometryError("local_time_moments requires x in D(0,n)");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  AbsorbingChain chain(law, Domain::of(Region::disc({0, 0}, n), amb), opt);
  const auto g0 = green_column(chain, {0, 0});
  LocalTimeLaw out;
  out.green_x0 = value_at(chain, g0, cx);
  out.green_00 = value_at(chain, g0, {0, 0});
  double fact = 1;
  for (int k = 1; k <= k_max; ++k) {
    fact *= k;
    out.moments.push_back(fact * out.green_x0 * std::pow(out.green_00, k - 1));
  }
  // E L^k = sum_m m^k q r^{m-1} (1-r), summed until the terms are negligible.
  const double q = out.entry_prob(), r = out.return_prob();
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0;
    for (long m = 1;; ++m) {
      const double term = std::pow(static_cast<double>(m), k) * q * std::pow(r, static_cast<double>(m - 1)) * (1 - r);
      acc += term;
      if (m > 10 && term < 1e-18 * acc) break;
      if (m > 100000000) throw NumericalError("local-time moment series did not converge");
    }
    out.dist_moments.push_back(acc);
  }
  return out;
}

/// Ĝ_{D̂(0,n)^c}(x̂,x̂) on Z^2_K.
inline double external_green(const StepLaw& law, std::int64_t K, double n, Point x, SolverOptions opt = {}) {
  require_toral_disc(n, K);
  const Ambient amb = Ambient::torus(K);
  const Point cx = amb.canonical(x);
  if (within_radius(torus_norm2(cx, K), n)) throw GeometryError("external_green requires |x| > n");
  const Region disc = Region::disc({0, 0}, n);
  AbsorbingChain chain(law, Domain(amb, transient_points(amb, {&disc})), opt);
  return value_at(chain, green_column(chain, cx), cx);
}

/// Expected entrance time into `target`. On the torus the time is finite;
/// on the plane it is capped by the exit of `outer_cap`.
struct EntranceTimes {
  AbsorbingChain chain;
  std::vector<double> times;

  double at(Point y) const { return value_at(chain, times, y); }
  double sup() const { return *std::max_element(times.begin(), times.end()); }
};

inline EntranceTimes entrance_times(const StepLaw& law, const Ambient& amb, const Region& target,
                                    const std::optional<Region>& outer_cap, SolverOptions opt = {}) {
  std::vector<Point> states;
  if (amb.is_torus()) {
    states = transient_points(amb, {&target});
  } else {
    if (!outer_cap) throw GeometryError("planar entrance times need an outer cap (the uncapped mean is infinite)");
    for (auto p : outer_cap->enumerate())
      if (!target.contains(p)) states.push_back(p);
  }
  AbsorbingChain chain(law, Domain(amb, std::move(states)), opt);
  auto t = expected_exit_times(chain);
  return {std::move(chain), std::move(t)};
}

inline double entrance_time(const StepLaw& law, const Ambient& amb, const Region& target, Point y,
                            const std::optional<Region>& outer_cap = std::nullopt, SolverOptions opt = {}) {
  if (target.contains(amb.canonical(y), amb)) throw GeometryError("entrance_time: start lies in the target");
  return entrance_times(law, amb, target, outer_cap, opt).at(amb.canonical(y));
}

/// Partition of the space into A = D(0,n), C = the s-annulus and
/// B = D(0,n+s)^c:
///   psi_x   = P^x(T_B < T_C), x in A             (jump over the annulus outward)
///   sigma_y = P^y(T_A < T_C), y in B             (jump over the annulus inward)
///   rho_x   = P^x(T_B < T_C, then T_A < T_C), x in A
///   phi_y   = P^y(T_A < T_C, then T_B < T_C), y in B
/// psi is the maximum over D(0,n/2) and sigma the maximum over B. The
/// B-side quantities need a finite B, so they are torus only.
struct AnnulusStats {
  double psi = 0;
  double psi_sup_a = 0;  // max of psi_x over all of A
  std::optional<double> sigma;
  std::vector<Point> a_states;
  std::vector<Point> b_states;
  std::vector<double> psi_all;    // over a_states
  std::vector<double> rho_all;    // over a_states, torus only
  std::vector<double> sigma_all;  // over b_states
  std::vector<double> phi_all;    // over b_states

  std::map<Point, double> psi_x;  // over D(0,n/2)
  std::map<Point, double> rho;    // over D(0,n/2), torus only
};

inline AnnulusStats annulus_stats(const StepLaw& law, const Ambient& amb, double n, double s, SolverOptions opt = {},
                                  bool psi_only = false) {
  if (!(s > 0) || !(n > 0)) throw GeometryError("annulus_stats: n and s must be positive");
  if (!(s <= n)) throw GeometryError("annulus_stats requires s <= n");
  if (amb.is_torus()) require_toral_annulus(n, s, amb.K());
  const Region A = Region::disc({0, 0}, n);
  const Region outer = Region::disc({0, 0}, n + s);
  const auto in_B = [&](Point p) { return !outer.contains(p, amb); };
  const auto in_A = [&](Point p) { return A.contains(p, amb); };
  const Region half = Region::disc({0, 0}, n / 2);

  AbsorbingChain chain_a(law, Domain::of(A, amb), opt);
  AnnulusStats out;
  out.a_states = chain_a.domain().states();
  out.psi_all = chain_a.solve(chain_a.exit_sum([&](Point y) { return in_B(y) ? 1.0 : 0.0; }));
  for (std::size_t i = 0; i < chain_a.size(); ++i) {
    const Point x = chain_a.domain()[i];
    out.psi_sup_a = std::max(out.psi_sup_a, out.psi_all[i]);
    if (half.contains(x, amb)) {
      out.psi_x[x] = out.psi_all[i];
      out.psi = std::max(out.psi, out.psi_all[i]);
    }
  }
  if (!amb.is_torus() || psi_only) return out;

  std::vector<Point> b_states;
  for (auto p : fundamental_domain(amb.K()))
    if (in_B(p)) b_states.push_back(p);
  AbsorbingChain chain_b(law, Domain(amb, std::move(b_states)), opt);
  out.b_states = chain_b.domain().states();
  out.sigma_all = chain_b.solve(chain_b.exit_sum([&](Point y) { return in_A(y) ? 1.0 : 0.0; }));
  out.sigma = *std::max_element(out.sigma_all.begin(), out.sigma_all.end());

  out.rho_all = chain_a.solve(chain_a.exit_sum([&](Point y) {
    return in_B(y) ? out.sigma_all[static_cast<std::size_t>(chain_b.domain().index_of(y))] : 0.0;
  }));
  for (std::size_t i = 0; i < chain_a.size(); ++i)
    if (half.contains(chain_a.domain()[i], amb)) out.rho[chain_a.domain()[i]] = out.rho_all[i];

  out.phi_all = chain_b.solve(chain_b.exit_sum([&](Point y) {
    return in_A(y) ? out.psi_all[static_cast<std::size_t>(chain_a.domain().index_of(y))] : 0.0;
  }));
  return out;
}

/// Absorption into labelled sets: for every transient x, the probability of
/// first leaving `transient` at a point y with label(y) == k, for each k in
/// [0, labels). Unlabelled exits (label < 0) are dropped.
struct Absorption {
  AbsorbingChain chain;
  std::vector<std::vector<double>> prob;  // prob[k][i]

  double at(int k, Point x) const { return value_at(chain, prob[static_cast<std::size_t>(k)], x); }
};

template <class Label>
Absorption absorption(const StepLaw& law, const Ambient& amb, std::vector<Point> transient, int labels, Label&& label,
                      SolverOptions opt = {}) {
  AbsorbingChain chain(law, Domain(amb, std::move(transient)), opt);
  std::vector<std::vector<double>> prob;
  for (int k = 0; k < labels; ++k)
    prob.push_back(chain.solve(chain.exit_sum([&](Point y) { return label(y) == k ? 1.0 : 0.0; })));
  return {std::move(chain), std::move(prob)};
}

/// Ĝ_{D̂(0,n)^c}(x̂,x̂) at several points with a single factorization.
inline std::vector<double> external_green_diag(const StepLaw& law, std::int64_t K, double n,
                                               const std::vector<Point>& xs, SolverOptions opt = {}) {
  require_toral_disc(n, K);
  const Ambient amb = Ambient::torus(K);
  const Region disc = Region::disc({0, 0}, n);
  AbsorbingChain chain(law, Domain(amb, transient_points(amb, {&disc})), opt);
  std::vector<double> out;
  for (auto x : xs) {
    const Point cx = amb.canonical(x);
    if (disc.contains(cx, amb)) throw GeometryError("external_green requires |x| > n");
    out.push_back(value_at(chain, green_column(chain, cx), cx));
  }
  return out;
}

}  // namespace discwalk
