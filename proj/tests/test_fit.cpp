#include <catch_amalgamated.hpp>

#include <discwalk/fit.hpp>

#include <cmath>

using namespace discwalk;
using Catch::Approx;

TEST_CASE("affine-in-log recovers exact affine data") {
  // y = 2u + 3 with u = log x.
  std::vector<double> x, y;
  for (double u : {0.0, 1.0, 2.0, 3.5}) {
    x.push_back(std::exp(u));
    y.push_back(2 * u + 3);
  }
  const auto r = fit_constant(FitModel::AffineInLog, x, y);
  CHECK(r.slope == Approx(2.0).epsilon(1e-12));
  CHECK(r.intercept == Approx(3.0).epsilon(1e-12));
  CHECK(r.r2 == Approx(1.0));
  for (double e : r.residuals) CHECK(std::abs(e) < 1e-12);
}

TEST_CASE("power-law slope") {
  std::vector<double> x{4, 8, 16, 32}, y;
  for (double v : x) y.push_back(7 * std::pow(v, -4.0));
  const auto r = fit_constant(FitModel::PowerLawSlope, x, y);
  CHECK(r.slope == Approx(-4.0).epsilon(1e-12));
  CHECK(std::exp(r.intercept) == Approx(7.0).epsilon(1e-10));
}

TEST_CASE("envelope-sup constant dominates every point") {
  const std::vector<double> g{1, 2, 4}, y{0.5, 3, 2};
  const auto r = fit_constant(FitModel::EnvelopeSup, g, y);
  CHECK(r.constant == Approx(1.5));
  for (double e : r.residuals) CHECK(e <= 1e-15);
}

TEST_CASE("degenerate fits are rejected") {
  CHECK_THROWS_AS(fit_constant(FitModel::AffineInLog, {1, 2}, {1, 2}), DegenerateFit);
  CHECK_THROWS_AS(fit_constant(FitModel::AffineInLog, {2, 2, 2}, {1, 2, 3}), DegenerateFit);
  CHECK_THROWS_AS(fit_constant(FitModel::PowerLawSlope, {1, 2, 3}, {1, -2, 3}), DegenerateFit);
  CHECK_THROWS_AS(fit_constant(FitModel::AffineInLog, {1, 2, 3}, {1, 2}), DegenerateFit);
}

TEST_CASE("doubling drift") {
  CHECK(doubling_drift({1.0, 1.1, 1.0}) == Approx(0.1));
  CHECK(doubling_drift({2.0}) == 0.0);
  CHECK(std::isinf(relative_change(0.0, 1.0)));
}
