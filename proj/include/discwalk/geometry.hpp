#pragma once

// Lattice points, torus projection, discs and annuli on Z^2 and Z^2_K,
// copy enumeration and the jump taxonomy used by the toral estimates.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace discwalk {

/// Thrown when a geometric precondition (n < K/4, n + s < K/4, ...) fails.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point {
  std::int64_t x1 = 0;
  std::int64_t x2 = 0;

  constexpr Point operator+(Point o) const { return {x1 + o.x1, x2 + o.x2}; }
  constexpr Point operator-(Point o) const { return {x1 - o.x1, x2 - o.x2}; }
  constexpr Point operator-() const { return {-x1, -x2}; }
  constexpr auto operator<=>(const Point&) const = default;

  constexpr std::int64_t norm2() const { return x1 * x1 + x2 * x2; }
  double norm() const { return std::sqrt(static_cast<double>(norm2())); }
};

inline std::string to_string(Point p) {
  return std::to_string(p.x1) + "," + std::to_string(p.x2);
}

struct PointHash {
  std::size_t operator()(Point p) const noexcept {
    auto h = static_cast<std::uint64_t>(p.x1) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(p.x2) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Coordinate-wise (x + floor(K/2)) mod K - floor(K/2).
constexpr std::int64_t project_coord(std::int64_t v, std::int64_t K) {
  const std::int64_t half = K / 2;
  std::int64_t r = (v + half) % K;
  if (r < 0) r += K;
  return r - half;
}

/// pi_K: canonical representative of x in the fundamental domain
/// [-floor(K/2), K-1-floor(K/2)]^2.
constexpr Point project(Point x, std::int64_t K) {
  if (K < 1) throw GeometryError("torus side K must be >= 1");
  return {project_coord(x.x1, K), project_coord(x.x2, K)};
}

constexpr bool in_fundamental_domain(Point x, std::int64_t K) {
  const std::int64_t lo = -(K / 2);
  const std::int64_t hi = K - 1 - K / 2;
  return x.x1 >= lo && x.x1 <= hi && x.x2 >= lo && x.x2 <= hi;
}

class TorusPoint {
 public:
  TorusPoint(Point any, std::int64_t K) : rep_(project(any, K)), K_(K) {}

  Point rep() const { return rep_; }
  std::int64_t K() const { return K_; }
  bool operator==(const TorusPoint&) const = default;

 private:
  Point rep_;
  std::int64_t K_;
};

/// Minimum Euclidean distance between two torus points. Representatives lie in
/// the fundamental domain, so the 3x3 block of translates attains the infimum.
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.K() != b.K()) throw GeometryError("torus_distance: mismatched K");
  const std::int64_t K = a.K();
  std::int64_t best = -1;
  for (std::int64_t i = -1; i <= 1; ++i) {
    for (std::int64_t j = -1; j <= 1; ++j) {
      const Point d = a.rep() - (b.rep() + Point{i * K, j * K});
      if (best < 0 || d.norm2() < best) best = d.norm2();
    }
  }
  return std::sqrt(static_cast<double>(best));
}

/// Squared torus distance from the canonical origin, exact in integers.
inline std::int64_t torus_norm2(Point rep, std::int64_t K) {
  std::int64_t best = -1;
  for (std::int64_t i = -1; i <= 1; ++i) {
    for (std::int64_t j = -1; j <= 1; ++j) {
      const Point d = rep + Point{i * K, j * K};
      if (best < 0 || d.norm2() < best) best = d.norm2();
    }
  }
  return best;
}

/// Plane or torus Z^2_K. On the torus every point is carried by its
/// canonical representative.
class Ambient {
 public:
  static Ambient plane() { return Ambient{}; }
  static Ambient torus(std::int64_t K) {
    if (K < 1) throw GeometryError("torus side K must be >= 1");
    Ambient a;
    a.K_ = K;
    return a;
  }

  bool is_torus() const { return K_ > 0; }
  std::int64_t K() const { return K_; }
  Point canonical(Point p) const { return is_torus() ? project(p, K_) : p; }

  /// |p - c| on the plane, torus distance on Z^2_K (both as squared integers).
  std::int64_t dist2(Point p, Point c) const {
    if (!is_torus()) return (p - c).norm2();
    return torus_norm2(project(p - c, K_), K_);
  }

  std::string describe() const {
    return is_torus() ? "torus(" + std::to_string(K_) + ")" : "plane";
  }

  bool operator==(const Ambient&) const = default;

 private:
  std::int64_t K_ = 0;
};

/// Membership in the closed disc {x : |x - c| <= r}. Squared integer
/// distances compare exactly against r^2 for integral r.
inline bool within_radius(std::int64_t d2, double r) {
  return static_cast<double>(d2) <= r * r;
}

/// A set of lattice points: disc, annulus, explicit point set, or a boolean
/// combination. D(c,n) = {x : |x-c| <= n} and the s-annulus is
/// D(c,n+s) \ D(c,n).
class Region {
 public:
  enum class Kind { Disc, Annulus, Points, Complement, Union };

  static Region disc(Point center, double radius) {
    if (!(radius > 0)) throw GeometryError("disc radius must be positive");
    Region r(Kind::Disc);
    r.center_ = center;
    r.inner_ = radius;
    return r;
  }

  static Region annulus(Point center, double inner, double width) {
    if (!(inner > 0) || !(width > 0))
      throw GeometryError("annulus radius and width must be positive");
    Region r(Kind::Annulus);
    r.center_ = center;
    r.inner_ = inner;
    r.width_ = width;
    return r;
  }

  static Region points(std::vector<Point> pts) {
    Region r(Kind::Points);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    r.points_ = std::move(pts);
    return r;
  }

  Region complement() const {
    if (kind_ == Kind::Complement) return *children_.front();
    Region r(Kind::Complement);
    r.children_.push_back(std::make_shared<const Region>(*this));
    return r;
  }

  static Region unite(const Region& a, const Region& b) {
    Region r(Kind::Union);
    r.children_.push_back(std::make_shared<const Region>(a));
    r.children_.push_back(std::make_shared<const Region>(b));
    return r;
  }

  Kind kind() const { return kind_; }
  Point center() const { return center_; }
  double radius() const { return inner_; }
  double width() const { return width_; }
  double outer_radius() const { return kind_ == Kind::Annulus ? inner_ + width_ : inner_; }
  const std::vector<Point>& point_list() const { return points_; }

  /// Membership of p (already canonical on the torus).
  bool contains(Point p, const Ambient& amb = Ambient::plane()) const {
    switch (kind_) {
      case Kind::Disc:
        return within_radius(amb.dist2(p, center_), inner_);
      case Kind::Annulus: {
        const auto d2 = amb.dist2(p, center_);
        return !within_radius(d2, inner_) && within_radius(d2, inner_ + width_);
      }
      case Kind::Points: {
        if (!amb.is_torus()) return std::binary_search(points_.begin(), points_.end(), p);
        const Point q = amb.canonical(p);
        return std::any_of(points_.begin(), points_.end(),
                           [&](Point x) { return amb.canonical(x) == q; });
      }
      case Kind::Complement:
        return !children_.front()->contains(p, amb);
      case Kind::Union:
        return children_[0]->contains(p, amb) || children_[1]->contains(p, amb);
    }
    return false;
  }

  /// Finite regions only: a radius R with region inside D(center, R) plus the
  /// box bound used for enumeration. Complements are unbounded on the plane.
  std::optional<std::int64_t> box_radius() const {
    switch (kind_) {
      case Kind::Disc:
      case Kind::Annulus:
        return static_cast<std::int64_t>(std::ceil(outer_radius())) +
               std::max(std::abs(center_.x1), std::abs(center_.x2));
      case Kind::Points: {
        std::int64_t m = 0;
        for (auto p : points_) m = std::max({m, std::abs(p.x1), std::abs(p.x2)});
        return m;
      }
      case Kind::Union: {
        auto a = children_[0]->box_radius();
        auto b = children_[1]->box_radius();
        if (!a || !b) return std::nullopt;
        return std::max(*a, *b);
      }
      case Kind::Complement:
        return std::nullopt;
    }
    return std::nullopt;
  }

  /// All planar members, sorted. Throws for unbounded regions.
  std::vector<Point> enumerate() const {
    if (kind_ == Kind::Points) return points_;
    const auto R = box_radius();
    if (!R) throw GeometryError("cannot enumerate an unbounded planar region");
    std::vector<Point> out;
    for (std::int64_t a = -*R; a <= *R; ++a)
      for (std::int64_t b = -*R; b <= *R; ++b)
        if (contains({a, b})) out.push_back({a, b});
    return out;
  }

  /// All canonical members on Z^2_K, sorted.
  std::vector<Point> enumerate(const Ambient& amb) const {
    if (!amb.is_torus()) return enumerate();
    const std::int64_t K = amb.K();
    const std::int64_t lo = -(K / 2);
    std::vector<Point> out;
    for (std::int64_t a = lo; a < lo + K; ++a)
      for (std::int64_t b = lo; b < lo + K; ++b)
        if (contains({a, b}, amb)) out.push_back({a, b});
    return out;
  }

 private:
  explicit Region(Kind k) : kind_(k) {}

  Kind kind_;
  Point center_{};
  double inner_ = 0;
  double width_ = 0;
  std::vector<Point> points_;
  std::vector<std::shared_ptr<const Region>> children_;
};

/// Every canonical representative of Z^2_K, sorted.
inline std::vector<Point> fundamental_domain(std::int64_t K) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(K * K));
  const std::int64_t lo = -(K / 2);
  for (std::int64_t a = lo; a < lo + K; ++a)
    for (std::int64_t b = lo; b < lo + K; ++b) out.push_back({a, b});
  return out;
}

/// Radius constraint for discs on Z^2_K.
inline void require_toral_disc(double n, std::int64_t K) {
  if (!(n < static_cast<double>(K) / 4.0))
    throw GeometryError("disc radius n must be < K/4 (n=" + std::to_string(n) +
                        ", K=" + std::to_string(K) + ")");
}

inline void require_toral_annulus(double n, double s, std::int64_t K) {
  if (!(n + s < static_cast<double>(K) / 4.0))
    throw GeometryError("n + s must be < K/4 (n=" + std::to_string(n) +
                        ", s=" + std::to_string(s) + ", K=" + std::to_string(K) + ")");
}

/// Translates {A + (iK, jK) : |i|,|j| <= window}, row-major in (i, j).
inline std::vector<std::vector<Point>> enumerate_copies(const std::vector<Point>& A, std::int64_t K,
                                                        std::int64_t window) {
  if (window < 0) throw GeometryError("copy window must be >= 0");
  std::vector<std::vector<Point>> out;
  for (std::int64_t i = -window; i <= window; ++i) {
    for (std::int64_t j = -window; j <= window; ++j) {
      std::vector<Point> shifted;
      shifted.reserve(A.size());
      for (auto p : A) shifted.push_back(p + Point{i * K, j * K});
      out.push_back(std::move(shifted));
    }
  }
  return out;
}

struct JumpClass {
  bool baby = false;
  bool small = false;
  bool medium = false;
  bool large = false;
  bool targeted = false;

  bool operator==(const JumpClass&) const = default;
};

/// Classifies a step against a disc of radius n with an s-annulus on Z^2_K.
/// Magnitudes equal to a threshold get neither adjacent strict label.
/// A step is targeted when it is large and, launched from `launch`, lands in
/// a non-primary copy of `region`.
inline JumpClass classify_jump(Point step, double n, double s, std::int64_t K,
                               std::optional<Point> launch = std::nullopt,
                               const Region* region = nullptr) {
  if (!(s > 0) || !(n > 0)) throw GeometryError("classify_jump: n and s must be positive");
  if (!(2 * n < static_cast<double>(K) / 2.0))
    throw GeometryError("classify_jump: requires 2n < K/2");
  const double len = step.norm();
  const double kd = static_cast<double>(K);
  JumpClass c;
  c.baby = len < s;
  c.small = len < 2 * n;
  c.medium = s < len && len < kd - 2 * n;
  c.large = len > kd - 2 * n;
  if (c.large && launch && region) {
    const Point land = *launch + step;
    const Point primary = project(land, K);
    c.targeted = land != primary && region->contains(primary);
  }
  return c;
}

}  // namespace discwalk
