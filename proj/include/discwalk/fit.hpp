#pragma once

// Least squares in transformed coordinates and sup-envelope constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace discwalk {

class DegenerateFit : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FitModel {
  AffineInLog,    // y = intercept + slope * log x
  PowerLawSlope,  // log y = intercept + slope * log x
  EnvelopeSup,    // y <= c * g, c = max y / g
};

inline std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::AffineInLog: return "affine-in-log";
    case FitModel::PowerLawSlope: return "power-law-slope";
    case FitModel::EnvelopeSup: return "envelope-sup";
  }
  return "?";
}

struct FitResult {
  FitModel model = FitModel::AffineInLog;
  double slope = 0;
  double intercept = 0;
  double constant = 0;  // envelope-sup only
  double r2 = 0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = intercept + slope * u.
inline FitResult ols(const std::vector<double>& u, const std::vector<double>& y) {
  if (u.size() != y.size()) throw DegenerateFit("fit: x and y differ in length");
  if (u.size() < 3) throw DegenerateFit("fit needs at least 3 data points");
  const double n = static_cast<double>(u.size());
  double mu = 0, my = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(y[i])) throw DegenerateFit("fit: non-finite data");
    mu += u[i];
    my += y[i];
  }
  mu /= n;
  my /= n;
  double suu = 0, suy = 0, syy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suy += (u[i] - mu) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(suu > 1e-300)) throw DegenerateFit("fit: degenerate design matrix (all x equal)");
  FitResult r;
  r.slope = suy / suu;
  r.intercept = my - r.slope * mu;
  double sse = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = y[i] - (r.intercept + r.slope * u[i]);
    r.residuals.push_back(e);
    sse += e * e;
  }
  r.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  return r;
}

/// For EnvelopeSup, `x` holds the envelope shape g and `y` the measured values.
inline FitResult fit_constant(FitModel model, const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DegenerateFit("fit: x and y differ in length");
  if (x.size() < 3) throw DegenerateFit("fit needs at least 3 data points");
  std::vector<double> u(x.size()), v(y);
  switch (model) {
    case FitModel::AffineInLog: {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0)) throw DegenerateFit("affine-in-log needs x > 0");
        u[i] = std::log(x[i]);
      }
      auto r = ols(u, v);
      r.model = model;
      return r;
    }
    case FitModel::PowerLawSlope: {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DegenerateFit("power-law-slope needs x, y > 0");
        u[i] = std::log(x[i]);
        v[i] = std::log(y[i]);
      }
      auto r = ols(u, v);
      r.model = model;
      return r;
    }
    case FitModel::EnvelopeSup: {
      FitResult r;
      r.model = model;
      r.constant = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0)) throw DegenerateFit("envelope-sup needs a positive envelope");
        r.constant = std::max(r.constant, y[i] / x[i]);
      }
      for (std::size_t i = 0; i < x.size(); ++i) r.residuals.push_back(y[i] - r.constant * x[i]);
      r.r2 = 1.0;
      return r;
    }
  }
  throw DegenerateFit("unknown fit model");
}

/// max y_i / g_i over any number of points (no minimum count).
inline double sup_ratio(const std::vector<double>& g, const std::vector<double>& y) {
  double c = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] > 0) c = std::max(c, y[i] / g[i]);
  return c;
}

/// |b/a - 1|, infinite when a is not positive.
inline double relative_change(double a, double b) {
  if (!(a > 0)) return std::numeric_limits<double>::infinity();
  return std::abs(b / a - 1.0);
}

/// Largest relative change between consecutive constants of a doubling sweep.
inline double doubling_drift(const std::vector<double>& c) {
  double worst = 0;
  for (std::size_t i = 1; i < c.size(); ++i) worst = std::max(worst, relative_change(c[i - 1], c[i]));
  return worst;
}

}  // namespace discwalk
