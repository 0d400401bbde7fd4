#include <catch_amalgamated.hpp>

#include <discwalk/step_law.hpp>

#include <numbers>
#include <sstream>

using namespace discwalk;
using Catch::Approx;

TEST_CASE("srw statistics") {
  const auto st = validate(srw());
  CHECK(st.cov_scalar == Approx(0.5));
  CHECK(st.gamma_sq == Approx(1.0));
  CHECK(st.pi_gamma == Approx(std::numbers::pi));
  CHECK(st.M == 6.0);
  CHECK(st.moment_M == Approx(1.0));
  CHECK(st.aperiodicity_power > 0);
}

TEST_CASE("lazy walk scales the covariance") {
  const auto st = validate(lazy_srw(0.3));
  CHECK(st.gamma_sq == Approx(0.7));
  CHECK(st.pi_gamma == Approx(0.7 * std::numbers::pi));
  CHECK(lazy_srw(0.3).mass({0, 0}) == Approx(0.3));
}

TEST_CASE("power law is symmetric, normalized and heavy tailed") {
  const StepLaw law = power_law(1, 64);
  const auto st = validate(law);
  CHECK(st.M == 6.0);
  CHECK(law.mass({0, 0}) == Approx(kPowerLawHold));
  for (const auto& a : law.atoms()) {
    REQUIRE(law.mass(-a.step) == a.mass);
    REQUIRE(law.mass({a.step.x2, a.step.x1}) == Approx(a.mass).epsilon(1e-12));
  }
  // Finite M-th moment but a much heavier tail than srw.
  CHECK(std::isfinite(st.moment_M));
  CHECK(law.max_step() == Approx(64.0));
  CHECK(moment(law, 0) == Approx(1.0));
}

TEST_CASE("builtin spec parsing") {
  CHECK(builtin("srw").name() == "srw");
  CHECK(builtin("lazy_srw(0.25)").mass({0, 0}) == Approx(0.25));
  CHECK(builtin("power_law(2,8)").beta() == 2.0);
  CHECK(builtin("power_law(2,8)").moment_order() == 8.0);
  CHECK_THROWS_AS(builtin("levy"), LawError);
  CHECK_THROWS_AS(lazy_srw(1.0), LawError);
  CHECK_THROWS_AS(power_law(0, 8), LawError);
}

TEST_CASE("validation rejects bad laws with the right kind") {
  const auto kind_of = [](const StepLaw& law) {
    try {
      validate(law);
    } catch (const LawError& e) {
      return e.kind();
    }
    FAIL("law was accepted");
    return LawError::Kind::BadParameter;
  };
  CHECK(kind_of(StepLaw("a", {{{1, 0}, 0.5}, {{0, 1}, 0.5}})) == LawError::Kind::AsymmetricLaw);
  CHECK(kind_of(StepLaw("b", {{{1, 0}, 0.3}, {{-1, 0}, 0.3}})) == LawError::Kind::BadNormalization);
  CHECK(kind_of(StepLaw("c", {{{1, 0}, 0.5}, {{-1, 0}, 0.5}})) == LawError::Kind::AnisotropicCovariance);
  // Steps of length 5 stay on 5Z^2, which collapses to a point on Z^2_5.
  CHECK(kind_of(StepLaw("d", {{{5, 0}, 0.25}, {{-5, 0}, 0.25}, {{0, 5}, 0.25}, {{0, -5}, 0.25}})) ==
        LawError::Kind::NotAperiodic);
  CHECK_THROWS_AS(StepLaw("e", {{{1, 0}, -0.1}}), LawError);
}

TEST_CASE("law files round trip") {
  for (const auto& spec : {"srw", "lazy_srw(0.3)", "power_law(1,16)"}) {
    const StepLaw law = builtin(spec);
    std::stringstream ss;
    write_law(ss, law);
    const StepLaw back = read_law(ss);
    REQUIRE(back.name() == law.name());
    REQUIRE(back.beta() == law.beta());
    REQUIRE(back.atoms().size() == law.atoms().size());
    for (std::size_t i = 0; i < law.atoms().size(); ++i) {
      REQUIRE(back.atoms()[i].step == law.atoms()[i].step);
      REQUIRE(back.atoms()[i].mass == law.atoms()[i].mass);
    }
  }
  std::stringstream bad("name x\n1 0\n");
  CHECK_THROWS_AS(read_law(bad), LawError);
}

TEST_CASE("large jump probability and Markov bound") {
  const StepLaw law = power_law(1, 64);
  const auto lj = large_jump_prob(law, 64, 5);
  double brute = 0;
  for (const auto& a : law.atoms())
    if (a.step.norm() > 54) brute += a.mass;
  CHECK(lj.exact == Approx(brute));
  CHECK(lj.exact > 0);
  CHECK(lj.exact <= lj.markov_bound);
  CHECK(large_jump_prob(srw(), 32, 7).exact == 0.0);
  CHECK_THROWS_AS(large_jump_prob(srw(), 16, 5), GeometryError);
}

TEST_CASE("projected kernel preserves mass and symmetry") {
  for (std::int64_t K : {5, 8, 16}) {
    const auto ker = project_kernel(power_law(1, 32), K);
    double total = 0;
    for (const auto& o : ker.offsets()) {
      total += o.mass;
      REQUIRE(ker({0, 0}, o.step) == ker(o.step, {0, 0}));
      REQUIRE(in_fundamental_domain(o.step, K));
    }
    REQUIRE(total == Approx(1.0).epsilon(1e-13));
    REQUIRE(ker.truncation_bias() == 0.0);
    // Translation invariance.
    REQUIRE(ker({1, 2}, {3, 2}) == ker({0, 0}, {2, 0}));
  }
  const auto trunc = project_kernel(power_law(1, 64), 16, 1e-6);
  CHECK(trunc.truncation_bias() > 0);
  CHECK_THROWS_AS(project_kernel(srw(), 2), GeometryError);
}
