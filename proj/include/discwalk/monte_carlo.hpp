#pragma once

// Trajectory simulation on Z^2 and Z^2_K with alias-table sampling,
// counter-based per-trajectory seeding and worker-count invariant estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "geometry.hpp"
#include "step_law.hpp"

namespace discwalk {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory `index` under `master`; independent of scheduling.
inline std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

/// mt19937_64 with explicit bit-to-number conversions, so draws do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t bits() { return eng_(); }
  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1} by multiply-high.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits()) * n) >> 64);
  }

 private:
  std::mt19937_64 eng_;
};

/// Walker/Vose alias table over the atoms of a law.
class AliasTable {
 public:
  explicit AliasTable(const StepLaw& law) {
    const auto& atoms = law.atoms();
    const std::size_t n = atoms.size();
    if (n == 0) throw std::invalid_argument("alias table over an empty law");
    steps_.reserve(n);
    double total = 0;
    for (const auto& a : atoms) total += a.mass;
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      steps_.push_back(atoms[i].step);
      scaled[i] = atoms[i].mass * static_cast<double>(n) / total;
    }
    prob_.assign(n, 1.0);
    alias_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alias_[i] = i;
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : small) prob_[i] = 1.0;
    for (auto i : large) prob_[i] = 1.0;
  }

  Point sample(Rng& rng) const {
    const std::size_t col = static_cast<std::size_t>(rng.below(steps_.size()));
    return rng.uniform() < prob_[col] ? steps_[col] : steps_[alias_[col]];
  }

  std::size_t size() const { return steps_.size(); }
  /// Probability of keeping column i's own step rather than its alias.
  double column_prob(std::size_t i) const { return prob_[i]; }
  std::size_t column_alias(std::size_t i) const { return alias_[i]; }
  const std::vector<Point>& steps() const { return steps_; }

 private:
  std::vector<Point> steps_;
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

/// Region membership flattened to a bitmap where possible.
class Membership {
 public:
  Membership(const Region& region, const Ambient& amb) : region_(region), amb_(amb) {
    if (amb.is_torus()) {
      const std::int64_t K = amb.K();
      lo_ = -(K / 2);
      w_ = K;
      bits_.assign(static_cast<std::size_t>(w_ * w_), 0);
      for (auto p : fundamental_domain(K)) set(p, region.contains(p, amb));
      mode_ = Mode::Bitmap;
      return;
    }
    const Region* base = &region;
    if (region.kind() == Region::Kind::Complement) {
      inverted_ = true;
      inner_ = region.complement();
      base = &*inner_;
    }
    if (auto R = base->box_radius()) {
      lo_ = -*R;
      w_ = 2 * *R + 1;
      bits_.assign(static_cast<std::size_t>(w_ * w_), 0);
      for (auto p : base->enumerate()) set(p, true);
      mode_ = Mode::Bitmap;
    }
  }

  bool operator()(Point p) const {
    if (mode_ == Mode::Fallback) return region_.contains(p, amb_);
    const std::int64_t a = p.x1 - lo_, b = p.x2 - lo_;
    bool in = false;
    if (a >= 0 && b >= 0 && a < w_ && b < w_) in = bits_[static_cast<std::size_t>(a * w_ + b)] != 0;
    return in != inverted_;
  }

 private:
  enum class Mode { Bitmap, Fallback };
  void set(Point p, bool v) {
    bits_[static_cast<std::size_t>((p.x1 - lo_) * w_ + (p.x2 - lo_))] = v ? 1 : 0;
  }

  Region region_;
  Ambient amb_;
  std::optional<Region> inner_;
  Mode mode_ = Mode::Fallback;
  bool inverted_ = false;
  std::int64_t lo_ = 0, w_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class StopKind { Enter, Exit };

struct StopCondition {
  Region region;
  StopKind kind = StopKind::Enter;
  std::string label;
};

inline StopCondition enters(Region r, std::string label = "enter") { return {std::move(r), StopKind::Enter, std::move(label)}; }
inline StopCondition leaves(Region r, std::string label = "exit") { return {std::move(r), StopKind::Exit, std::move(label)}; }

struct StopSpec {
  Ambient ambient = Ambient::plane();
  std::vector<StopCondition> conditions;
  std::int64_t step_cap = 100'000'000;
  /// Count visits to this point (canonical on the torus) up to the stop time.
  std::optional<Point> local_time_at;

  void check() const {
    if (step_cap < 1) throw std::invalid_argument("step cap must be >= 1");
    if (conditions.empty()) throw std::invalid_argument("a stop spec needs at least one absorbing condition");
  }
};

enum class StopReason { Absorbed, CapHit };

struct Trajectory {
  StopReason reason = StopReason::CapHit;
  int condition = -1;  // index of the first satisfied condition
  std::int64_t time = 0;
  Point position;
  std::int64_t local_time = 0;
};

/// A stop spec with its memberships compiled once for many trajectories.
class CompiledStop {
 public:
  explicit CompiledStop(const StopSpec& spec) : spec_(spec) {
    spec_.check();
    for (const auto& c : spec_.conditions) members_.emplace_back(c.region, spec_.ambient);
    if (spec_.local_time_at) local_ = spec_.ambient.canonical(*spec_.local_time_at);
  }

  const StopSpec& spec() const { return spec_; }

  int stopped(Point p) const {
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const bool in = members_[k](p);
      if (in == (spec_.conditions[k].kind == StopKind::Enter)) return static_cast<int>(k);
    }
    return -1;
  }

  Trajectory run(const AliasTable& table, Point start, std::uint64_t seed) const {
    Rng rng(seed);
    const Ambient& amb = spec_.ambient;
    Trajectory tr;
    Point pos = amb.canonical(start);
    std::int64_t t = 0;
    for (;;) {
      if (local_ && pos == *local_) ++tr.local_time;
      const int k = stopped(pos);
      if (k >= 0) {
        tr.reason = StopReason::Absorbed;
        tr.condition = k;
        break;
      }
      if (t >= spec_.step_cap) {
        tr.reason = StopReason::CapHit;
        break;
      }
      pos = amb.canonical(pos + table.sample(rng));
      ++t;
    }
    tr.time = t;
    tr.position = pos;
    return tr;
  }

 private:
  StopSpec spec_;
  std::vector<Membership> members_;
  std::optional<Point> local_;
};

inline Trajectory run_trajectory(const StepLaw& law, Point start, const StopSpec& spec, std::uint64_t seed) {
  return CompiledStop(spec).run(AliasTable(law), start, seed);
}

/// First `steps` positions (including the start) driven by `seed`.
inline std::vector<Point> sample_path(const StepLaw& law, Point start, const Ambient& amb, std::int64_t steps,
                                      std::uint64_t seed) {
  AliasTable table(law);
  Rng rng(seed);
  std::vector<Point> out{amb.canonical(start)};
  for (std::int64_t t = 0; t < steps; ++t) out.push_back(amb.canonical(out.back() + table.sample(rng)));
  return out;
}

/// Runs f(i) for i in [0, n) on `workers` threads over contiguous chunks.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Estimate {
  double mean = 0;
  double std_error = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  std::size_t n_samples = 0;
  std::uint64_t master_seed = 0;
  std::size_t cap_hits = 0;
  bool flagged = false;
};

/// Mean, standard error and 95% interval of per-sample values, summed in
/// index order.
inline Estimate summarize(const std::vector<double>& v, std::uint64_t seed) {
  Estimate e;
  e.n_samples = v.size();
  e.master_seed = seed;
  if (v.empty()) return e;
  double sum = 0;
  for (double x : v) sum += x;
  e.mean = sum / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  if (v.size() > 1) e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  e.ci_lo = e.mean - 1.96 * e.std_error;
  e.ci_hi = e.mean + 1.96 * e.std_error;
  return e;
}

enum class Statistic { Time, Indicator, LocalTime };

struct EstimateOptions {
  std::size_t n_samples = 10000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  /// Estimates with more CapHit trajectories than this fraction are flagged.
  double cap_fraction_limit = 0.01;
  /// For Statistic::Indicator: the condition whose hit counts as 1.
  int indicator = 0;
};

inline Estimate estimate(const StepLaw& law, Point start, const StopSpec& spec, Statistic stat, const EstimateOptions& opt) {
  if (opt.n_samples < 100) throw std::invalid_argument("estimate requires n_samples >= 100");
  if (stat == Statistic::LocalTime && !spec.local_time_at)
    throw std::invalid_argument("local-time statistic needs a local-time point");
  if (stat == Statistic::Indicator && (opt.indicator < 0 || opt.indicator >= static_cast<int>(spec.conditions.size())))
    throw std::invalid_argument("indicator condition out of range");
  const CompiledStop stop(spec);
  const AliasTable table(law);
  std::vector<double> values(opt.n_samples);
  std::vector<std::uint8_t> capped(opt.n_samples, 0);
  parallel_for(opt.n_samples, opt.workers, [&](std::size_t i) {
    const Trajectory tr = stop.run(table, start, trajectory_seed(opt.master_seed, i));
    capped[i] = tr.reason == StopReason::CapHit;
    switch (stat) {
      case Statistic::Time: values[i] = static_cast<double>(tr.time); break;
      case Statistic::Indicator: values[i] = tr.condition == opt.indicator ? 1.0 : 0.0; break;
      case Statistic::LocalTime: values[i] = static_cast<double>(tr.local_time); break;
    }
  });
  Estimate e = summarize(values, opt.master_seed);
  for (auto c : capped) e.cap_hits += c;
  e.flagged = static_cast<double>(e.cap_hits) > opt.cap_fraction_limit * static_cast<double>(opt.n_samples);
  return e;
}

/// One run of the modified walk S*: every would-be escape from D(0,n) by a
/// step longer than K - 2n is redirected to y_star.
struct WorstCaseRun {
  std::int64_t tau = 0;     // final escape time
  std::int64_t sigma0 = 0;  // escape time of the unmodified walk
  std::int64_t relocations = 0;
  Point exit_position;
  bool cap_hit = false;
};

inline void require_worst_case_geometry(std::int64_t K, double n, Point y_star, Point start) {
  require_toral_disc(n, K);
  const Region disc = Region::disc({0, 0}, n);
  if (!disc.contains(y_star)) throw GeometryError("y_star must lie in D(0,n)");
  if (!disc.contains(start)) throw GeometryError("worst-case walk must start in D(0,n)");
}

inline WorstCaseRun worst_case_run(const AliasTable& table, std::int64_t K, double n, Point y_star, Point start,
                                   std::uint64_t seed, std::int64_t step_cap = 100'000'000) {
  Rng rng(seed);
  const double large = static_cast<double>(K) - 2 * n;
  const auto inside = [n](Point p) { return within_radius(p.norm2(), n); };
  WorstCaseRun out;
  Point pos = start;
  bool escaped_once = false;
  for (std::int64_t t = 1; t <= step_cap; ++t) {
    const Point X = table.sample(rng);
    const Point y = pos + X;
    if (inside(y)) {
      pos = y;
      continue;
    }
    if (!escaped_once) {
      escaped_once = true;
      out.sigma0 = t;
    }
    if (X.norm() > large) {
      pos = y_star;
      ++out.relocations;
      continue;
    }
    out.tau = t;
    out.exit_position = y;
    return out;
  }
  out.cap_hit = true;
  out.tau = step_cap;
  if (!escaped_once) out.sigma0 = step_cap;
  out.exit_position = pos;
  return out;
}

inline WorstCaseRun worst_case_walk(const StepLaw& law, std::int64_t K, double n, Point y_star, Point start,
                                    std::uint64_t seed) {
  require_worst_case_geometry(K, n, y_star, start);
  return worst_case_run(AliasTable(law), K, n, y_star, start, seed);
}

struct WorstCaseSummary {
  Estimate tau;
  Estimate sigma0;
  Estimate relocations;
  std::size_t runs_with_relocation = 0;
  double conditional_relocations = 0;  // mean of N given N > 0
  std::map<std::int64_t, std::size_t> relocation_histogram;
};

inline WorstCaseSummary worst_case_estimate(const StepLaw& law, std::int64_t K, double n, Point y_star, Point start,
                                            const EstimateOptions& opt) {
  if (opt.n_samples < 100) throw std::invalid_argument("estimate requires n_samples >= 100");
  require_worst_case_geometry(K, n, y_star, start);
  const AliasTable table(law);
  std::vector<WorstCaseRun> runs(opt.n_samples);
  parallel_for(opt.n_samples, opt.workers, [&](std::size_t i) {
    runs[i] = worst_case_run(table, K, n, y_star, start, trajectory_seed(opt.master_seed, i));
  });
  std::vector<double> tau, sigma, reloc;
  WorstCaseSummary out;
  std::size_t caps = 0;
  double cond = 0;
  for (const auto& r : runs) {
    tau.push_back(static_cast<double>(r.tau));
    sigma.push_back(static_cast<double>(r.sigma0));
    reloc.push_back(static_cast<double>(r.relocations));
    caps += r.cap_hit;
    out.relocation_histogram[r.relocations]++;
    if (r.relocations > 0) {
      ++out.runs_with_relocation;
      cond += static_cast<double>(r.relocations);
    }
  }
  out.tau = summarize(tau, opt.master_seed);
  out.sigma0 = summarize(sigma, opt.master_seed);
  out.relocations = summarize(reloc, opt.master_seed);
  for (Estimate* e : {&out.tau, &out.sigma0, &out.relocations}) {
    e->cap_hits = caps;
    e->flagged = static_cast<double>(caps) > opt.cap_fraction_limit * static_cast<double>(opt.n_samples);
  }
  if (out.runs_with_relocation > 0) out.conditional_relocations = cond / static_cast<double>(out.runs_with_relocation);
  return out;
}

}  // namespace discwalk
