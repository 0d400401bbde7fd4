#pragma once

// Symmetric step distributions on Z^2: validation against the standing
// assumptions (symmetry, scalar covariance, strong aperiodicity), moments,
// builtin laws, the projected one-step kernel on Z^2_K and the law file format.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace discwalk {

class LawError : public std::invalid_argument {
 public:
  enum class Kind { AsymmetricLaw, AnisotropicCovariance, NotAperiodic, BadNormalization, BadParameter };

  LawError(Kind k, const std::string& what) : std::invalid_argument(label(k) + ": " + what), kind_(k) {}
  Kind kind() const { return kind_; }

  static std::string label(Kind k) {
    switch (k) {
      case Kind::AsymmetricLaw: return "AsymmetricLaw";
      case Kind::AnisotropicCovariance: return "AnisotropicCovariance";
      case Kind::NotAperiodic: return "NotAperiodic";
      case Kind::BadNormalization: return "BadNormalization";
      case Kind::BadParameter: return "BadParameter";
    }
    return "LawError";
  }

 private:
  Kind kind_;
};

struct Atom {
  Point step;
  double mass = 0;
};

/// A finitely supported law for X_1. Atoms are kept sorted by step with
/// duplicates merged and zero masses dropped.
class StepLaw {
 public:
  StepLaw() = default;
  StepLaw(std::string name, std::vector<Atom> atoms, double beta = 1.0)
      : name_(std::move(name)), beta_(beta) {
    std::map<Point, double> merged;
    for (const auto& a : atoms) {
      if (a.mass < 0) throw LawError(LawError::Kind::BadNormalization, "negative mass at " + to_string(a.step));
      merged[a.step] += a.mass;
    }
    for (const auto& [p, m] : merged)
      if (m > 0) atoms_.push_back({p, m});
    for (const auto& a : atoms_) radius2_ = std::max(radius2_, a.step.norm2());
  }

  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double beta() const { return beta_; }
  /// M = 4 + 2 beta, the moment order of the standing assumption.
  double moment_order() const { return 4.0 + 2.0 * beta_; }
  double max_step() const { return std::sqrt(static_cast<double>(radius2_)); }
  std::int64_t max_step2() const { return radius2_; }

  double mass(Point x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, Point p) { return a.step < p; });
    return (it != atoms_.end() && it->step == x) ? it->mass : 0.0;
  }

 private:
  std::string name_;
  std::vector<Atom> atoms_;
  double beta_ = 1.0;
  std::int64_t radius2_ = 0;
};

/// Sum over the support of |x|^m p(x), with |0|^0 = 1.
inline double moment(const StepLaw& law, double m) {
  if (m < 0) throw LawError(LawError::Kind::BadParameter, "moment order must be >= 0");
  double acc = 0;
  for (const auto& a : law.atoms()) {
    const double r = a.step.norm();
    acc += (m == 0 ? 1.0 : std::pow(r, m)) * a.mass;
  }
  return acc;
}

struct LawStats {
  double cov_scalar = 0;  // c in Gamma = cI
  double gamma_sq = 0;    // trace of Gamma
  double pi_gamma = 0;    // 2 pi sqrt(det Gamma)
  double moment_M = 0;    // E|X_1|^M
  double M = 0;
  double beta = 0;
  int aperiodicity_power = 0;  // first t with p^t > 0 everywhere on Z^2_5
};

namespace detail {

/// t-fold convolution powers of the law projected on Z^2_K until every entry
/// is positive; returns that t, or 0 when none is found up to t_max.
inline int primitive_power(const StepLaw& law, std::int64_t K, int t_max) {
  const auto idx = [K](Point p) {
    const Point q = project(p, K);
    return static_cast<std::size_t>((q.x1 + K / 2) * K + (q.x2 + K / 2));
  };
  const std::size_t cells = static_cast<std::size_t>(K * K);
  std::vector<double> q(cells, 0.0);
  for (const auto& a : law.atoms()) q[idx(a.step)] += a.mass;
  std::vector<double> cur = q;
  std::vector<Point> reps;
  for (std::int64_t a = -(K / 2); a < K - K / 2; ++a)
    for (std::int64_t b = -(K / 2); b < K - K / 2; ++b) reps.push_back({a, b});
  for (int t = 1; t <= t_max; ++t) {
    if (std::all_of(cur.begin(), cur.end(), [](double v) { return v > 0; })) return t;
    std::vector<double> next(cells, 0.0);
    for (const auto& x : reps) {
      const double cx = cur[idx(x)];
      if (cx == 0) continue;
      for (const auto& y : reps) {
        const double qy = q[idx(y)];
        if (qy != 0) next[idx(x + y)] += cx * qy;
      }
    }
    cur = std::move(next);
  }
  return 0;
}

}  // namespace detail

inline LawStats validate(const StepLaw& law) {
  using K = LawError::Kind;
  if (law.atoms().empty()) throw LawError(K::BadParameter, "empty support");
  double total = 0;
  for (const auto& a : law.atoms()) {
    total += a.mass;
    const double mirror = law.mass(-a.step);
    if (std::abs(mirror - a.mass) > 1e-12 * std::max(1.0, a.mass))
      throw LawError(K::AsymmetricLaw, "S is not symmetric: mass(" + to_string(a.step) + ") != mass(" +
                                           to_string(-a.step) + ")");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw LawError(K::BadNormalization, "masses sum to " + std::to_string(total) + ", not 1");

  double g11 = 0, g22 = 0, g12 = 0;
  for (const auto& a : law.atoms()) {
    const auto x1 = static_cast<double>(a.step.x1);
    const auto x2 = static_cast<double>(a.step.x2);
    g11 += x1 * x1 * a.mass;
    g22 += x2 * x2 * a.mass;
    g12 += x1 * x2 * a.mass;
  }
  if (std::abs(g12) > 1e-9 || std::abs(g11 - g22) > 1e-9)
    throw LawError(K::AnisotropicCovariance, "covariance of X_1 is not a scalar times the identity");
  if (!(g11 > 0)) throw LawError(K::AnisotropicCovariance, "degenerate covariance");

  LawStats st;
  st.cov_scalar = 0.5 * (g11 + g22);
  st.gamma_sq = g11 + g22;
  st.pi_gamma = 2.0 * std::numbers::pi * st.cov_scalar;
  st.beta = law.beta();
  st.M = law.moment_order();
  st.moment_M = moment(law, st.M);
  st.aperiodicity_power = detail::primitive_power(law, 5, 25);
  if (st.aperiodicity_power == 0)
    throw LawError(K::NotAperiodic, "X is not strongly aperiodic (no positive power on Z^2_5 up to t=25)");
  return st;
}

// Heavy-tailed builtin: mass ∝ |x|^-(M + 2 + kPowerLawExcess) on 0 < |x| <= R_max,
// plus kPowerLawHold at the origin.
inline constexpr double kPowerLawExcess = 0.05;
inline constexpr double kPowerLawHold = 0.25;

inline StepLaw srw() {
  return StepLaw("srw", {{{1, 0}, 0.25}, {{-1, 0}, 0.25}, {{0, 1}, 0.25}, {{0, -1}, 0.25}});
}

inline StepLaw lazy_srw(double eps) {
  if (!(eps >= 0 && eps < 1)) throw LawError(LawError::Kind::BadParameter, "lazy_srw needs 0 <= eps < 1");
  const double q = (1 - eps) / 4;
  std::ostringstream nm;
  nm << "lazy_srw(" << eps << ")";
  return StepLaw(nm.str(), {{{0, 0}, eps}, {{1, 0}, q}, {{-1, 0}, q}, {{0, 1}, q}, {{0, -1}, q}});
}

inline StepLaw power_law(double beta, std::int64_t r_max) {
  if (!(beta > 0)) throw LawError(LawError::Kind::BadParameter, "power_law needs beta > 0");
  if (r_max < 2) throw LawError(LawError::Kind::BadParameter, "power_law needs R_max >= 2");
  const double expo = 4.0 + 2.0 * beta + 2.0 + kPowerLawExcess;
  // Accumulate by symmetry class so mirrored atoms get bit-identical masses.
  std::vector<Atom> atoms;
  double total = 0;
  for (std::int64_t a = -r_max; a <= r_max; ++a) {
    for (std::int64_t b = -r_max; b <= r_max; ++b) {
      const std::int64_t r2 = a * a + b * b;
      if (r2 == 0 || r2 > r_max * r_max) continue;
      const double w = std::pow(static_cast<double>(r2), -expo / 2.0);
      atoms.push_back({{a, b}, w});
      total += w;
    }
  }
  const double scale = (1.0 - kPowerLawHold) / total;
  for (auto& at : atoms) at.mass *= scale;
  atoms.push_back({{0, 0}, kPowerLawHold});
  std::ostringstream nm;
  nm << "power_law(" << beta << "," << r_max << ")";
  return StepLaw(nm.str(), std::move(atoms), beta);
}

/// Parses "srw", "lazy_srw(eps)" or "power_law(beta,R_max)".
inline StepLaw builtin(const std::string& spec) {
  static const std::regex lazy(R"(^\s*lazy_srw\(\s*([-+0-9.eE]+)\s*\)\s*$)");
  static const std::regex power(R"(^\s*power_law\(\s*([-+0-9.eE]+)\s*,\s*([0-9]+)\s*\)\s*$)");
  std::smatch m;
  if (spec == "srw") return srw();
  if (std::regex_match(spec, m, lazy)) return lazy_srw(std::stod(m[1]));
  if (std::regex_match(spec, m, power)) return power_law(std::stod(m[1]), std::stoll(m[2]));
  throw LawError(LawError::Kind::BadParameter, "unknown builtin law '" + spec + "'");
}

inline std::vector<std::string> builtin_names() {
  return {"srw", "lazy_srw(eps)", "power_law(beta,R_max)"};
}

/// Law file: '#' comments, "name <id>", optional "beta <value>", then one
/// "x1 x2 mass" entry per line.
inline void write_law(std::ostream& os, const StepLaw& law) {
  os << "# discwalk step law\n";
  os << "name " << law.name() << "\n";
  os << "beta " << std::setprecision(17) << law.beta() << "\n";
  for (const auto& a : law.atoms())
    os << a.step.x1 << " " << a.step.x2 << " " << std::setprecision(17) << a.mass << "\n";
}

inline StepLaw read_law(std::istream& is) {
  std::string line, name = "custom";
  double beta = 1.0;
  std::vector<Atom> atoms;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "name") {
      ls >> name;
    } else if (first == "beta") {
      ls >> beta;
    } else {
      Atom a;
      std::istringstream fs(first);
      if (!(fs >> a.step.x1) || !(ls >> a.step.x2 >> a.mass))
        throw LawError(LawError::Kind::BadParameter, "law file line " + std::to_string(lineno) + ": expected 'x1 x2 mass'");
      atoms.push_back(a);
    }
  }
  StepLaw law(name, std::move(atoms), beta);
  validate(law);
  return law;
}

inline StepLaw load_law(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LawError(LawError::Kind::BadParameter, "cannot open law file " + path);
  return read_law(in);
}

/// Resolves a builtin name or, failing that, a law file path.
inline StepLaw resolve_law(const std::string& spec) {
  try {
    return builtin(spec);
  } catch (const LawError& e) {
    if (e.kind() != LawError::Kind::BadParameter || spec.find('(') != std::string::npos) throw;
  }
  return load_law(spec);
}

struct LargeJumpProb {
  double exact = 0;
  double markov_bound = 0;
};

/// P(|X_1| > K - 2n) and the Markov bound C_M / (K - 2n)^M.
inline LargeJumpProb large_jump_prob(const StepLaw& law, std::int64_t K, double n) {
  if (!(2 * n < static_cast<double>(K) / 2.0)) throw GeometryError("large_jump_prob requires 2n < K/2");
  const double thr = static_cast<double>(K) - 2 * n;
  LargeJumpProb out;
  for (const auto& a : law.atoms())
    if (a.step.norm() > thr) out.exact += a.mass;
  out.markov_bound = moment(law, law.moment_order()) / std::pow(thr, law.moment_order());
  return out;
}

/// One-step kernel of the projected walk on Z^2_K. Translation invariant, so
/// it is stored as a law on canonical offsets.
class ToralKernel {
 public:
  ToralKernel(std::int64_t K, std::vector<Atom> offsets, double bias)
      : K_(K), offsets_(std::move(offsets)), bias_(bias) {}

  std::int64_t K() const { return K_; }
  double truncation_bias() const { return bias_; }
  const std::vector<Atom>& offsets() const { return offsets_; }

  double operator()(Point from, Point to) const {
    const Point d = project(to - from, K_);
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), d,
                               [](const Atom& a, Point p) { return a.step < p; });
    return (it != offsets_.end() && it->step == d) ? it->mass : 0.0;
  }

  /// Sparse row p̂_1(x, .) over canonical targets.
  std::vector<Atom> row(Point from) const {
    std::vector<Atom> out;
    out.reserve(offsets_.size());
    for (const auto& o : offsets_) out.push_back({project(from + o.step, K_), o.mass});
    return out;
  }

 private:
  std::int64_t K_;
  std::vector<Atom> offsets_;
  double bias_;
};

/// Sums p_1 over all copies of each target. Copies farther than R_t, where
/// C_M / R_t^M <= tail_tol, are omitted and their mass recorded as the bias;
/// a finite support inside R_t gives the exact kernel with zero bias.
inline ToralKernel project_kernel(const StepLaw& law, std::int64_t K, double tail_tol = 0.0) {
  if (K < 3) throw GeometryError("project_kernel requires K >= 3");
  const double M = law.moment_order();
  double r_t = std::numeric_limits<double>::infinity();
  if (tail_tol > 0) r_t = std::pow(moment(law, M) / tail_tol, 1.0 / M);
  std::map<Point, double> acc;
  double omitted = 0;
  for (const auto& a : law.atoms()) {
    if (a.step.norm() > r_t) {
      omitted += a.mass;
      continue;
    }
    acc[project(a.step, K)] += a.mass;
  }
  // Mirror offsets collect the same masses in a different order; copy one
  // value to both so symmetry holds bit for bit.
  for (auto& [p, m] : acc) {
    const Point mirror = project(-p, K);
    if (p < mirror) acc[mirror] = m;
  }
  std::vector<Atom> offsets;
  for (const auto& [p, m] : acc) offsets.push_back({p, m});
  return ToralKernel(K, std::move(offsets), omitted);
}

}  // namespace discwalk
