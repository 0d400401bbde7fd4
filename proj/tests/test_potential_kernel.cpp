#include <catch_amalgamated.hpp>

#include <discwalk/potential_kernel.hpp>

#include <numbers>

using namespace discwalk;
using Catch::Approx;

TEST_CASE("srw potential kernel closed forms") {
  const double pi = std::numbers::pi;
  const auto t = potential_kernel(srw(), {{1, 0}, {1, 1}, {2, 0}, {0, 0}}, 4096);
  CHECK(t.at({0, 0}) == 0.0);
  CHECK(t.at({1, 0}) == Approx(1.0).margin(1e-6));
  CHECK(t.at({1, 1}) == Approx(4.0 / pi).margin(1e-6));
  CHECK(t.at({2, 0}) == Approx(4.0 - 8.0 / pi).margin(1e-6));
  CHECK_FALSE(t.flagged);
  CHECK_THROWS_AS(t.at({5, 5}), std::out_of_range);
}

TEST_CASE("potential kernel grows like (2/pi_Gamma) log |x|") {
  const auto t = potential_kernel(srw(), {{8, 0}, {16, 0}}, 8192);
  CHECK(t.at({16, 0}) - t.at({8, 0}) == Approx(2.0 / std::numbers::pi * std::log(2.0)).margin(5e-3));
}

TEST_CASE("potential kernel rejects an aliasing grid") {
  PotentialKernelOptions o;
  o.grid_radius = 10;
  CHECK_THROWS_AS(potential_kernel(srw(), {{1, 0}}, 1024, o), GridTooSmall);
  CHECK_THROWS_AS(potential_kernel(srw(), {{1, 0}}, 0), std::invalid_argument);
}
