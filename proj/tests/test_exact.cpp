#include <catch_amalgamated.hpp>

#include <discwalk/exact.hpp>

using namespace discwalk;
using Catch::Approx;

TEST_CASE("unit disc oracles for srw") {
  // From 0 the walk moves to a neighbour; each neighbour exits w.p. 3/4:
  // E0 = 1 + E1, E1 = 1 + E0/4, so E0 = 8/3. G(0,0) = 1/(1 - 1/4) = 4/3.
  const Domain dom = Domain::of(Region::disc({0, 0}, 1), Ambient::plane());
  CHECK(expected_exit_time(srw(), dom, {0, 0}) == Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(expected_exit_time(srw(), dom, {1, 0}) == Approx(5.0 / 3.0).epsilon(1e-12));
  const GreenTable G = green(srw(), dom);
  CHECK(G({0, 0}, {0, 0}) == Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(G({1, 0}, {0, 0}) == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(hit_before(srw(), Ambient::plane(), Region::points({{0, 0}}), Region::disc({0, 0}, 1).complement(), {1, 0}) ==
        Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Green table is symmetric and its rows sum to exit times") {
  for (const auto& spec : {"srw", "power_law(1,8)"}) {
    const StepLaw law = builtin(spec);
    const Domain dom = Domain::of(Region::disc({0, 0}, 5), Ambient::plane());
    const AbsorbingChain chain(law, dom);
    const GreenTable G = green(chain);
    const auto E = expected_exit_times(chain);
    for (std::size_t i = 0; i < dom.size(); ++i) {
      double row = 0;
      for (std::size_t j = 0; j < dom.size(); ++j) {
        REQUIRE(G.at(i, j) == Approx(G.at(j, i)).epsilon(1e-10));
        REQUIRE(G.at(i, j) >= 0);
        row += G.at(i, j);
      }
      REQUIRE(row == Approx(E[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("lazy walk times scale by 1/(1-eps)") {
  const Domain dom = Domain::of(Region::disc({0, 0}, 9), Ambient::plane());
  const auto a = expected_exit_times(AbsorbingChain(srw(), dom));
  const auto b = expected_exit_times(AbsorbingChain(lazy_srw(0.3), dom));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(b[i] == Approx(a[i] / 0.7).epsilon(1e-10));
}

TEST_CASE("srw exit time equals E|X_T|^2 - |x|^2") {
  // |S_t|^2 - t is a martingale for srw.
  const Region D = Region::disc({0, 0}, 6);
  const Domain dom = Domain::of(D, Ambient::plane());
  for (Point x : {Point{0, 0}, Point{2, 3}, Point{5, 0}}) {
    const auto hd = hitting_distribution(srw(), Ambient::plane(), D.complement(), x);
    REQUIRE(hd.total() == Approx(1.0).epsilon(1e-12));
    double second = 0;
    for (const auto& [y, m] : hd.mass) second += m * static_cast<double>(y.norm2());
    CHECK(second - static_cast<double>(x.norm2()) == Approx(expected_exit_time(srw(), dom, x)).epsilon(1e-10));
  }
}

TEST_CASE("escape bounds hold at every start") {
  for (const auto& spec : {"srw", "lazy_srw(0.3)", "power_law(1,64)"}) {
    const StepLaw law = builtin(spec);
    const double g2 = validate(law).gamma_sq;
    for (double n : {4.0, 10.0}) {
      const AbsorbingChain chain(law, Domain::of(Region::disc({0, 0}, n), Ambient::plane()));
      const auto E = expected_exit_times(chain);
      for (std::size_t i = 0; i < E.size(); ++i) {
        const double lo = (n * n - static_cast<double>(chain.domain().states()[i].norm2())) / g2;
        REQUIRE(E[i] >= lo - 1e-9);
        REQUIRE(E[i] <= lo + 2 * n + 1 + 1e-9);
      }
    }
  }
}

TEST_CASE("finite-range toral quantities equal the planar ones") {
  for (auto [K, n] : {std::pair<std::int64_t, double>{32, 7}, {64, 15}}) {
    const Ambient tor = Ambient::torus(K);
    const auto et = expected_exit_times(AbsorbingChain(srw(), Domain::of(Region::disc({0, 0}, n), tor)));
    const auto ep = expected_exit_times(AbsorbingChain(srw(), Domain::of(Region::disc({0, 0}, n), Ambient::plane())));
    REQUIRE(et.size() == ep.size());
    for (std::size_t i = 0; i < et.size(); ++i) REQUIRE(std::abs(et[i] - ep[i]) <= 1e-10 * ep[i]);
  }
}

TEST_CASE("heavy-tailed toral escape exceeds the planar one") {
  const StepLaw law = power_law(1, 64);
  const double n = 5;
  const auto et = expected_exit_times(AbsorbingChain(law, Domain::of(Region::disc({0, 0}, n), Ambient::torus(24))));
  const auto ep = expected_exit_times(AbsorbingChain(law, Domain::of(Region::disc({0, 0}, n), Ambient::plane())));
  for (std::size_t i = 0; i < et.size(); ++i) REQUIRE(et[i] > ep[i]);
}

TEST_CASE("local time: rising factorial moments of a geometric law") {
  for (const auto& spec : {"srw", "power_law(1,64)"}) {
    const auto lt = local_time_moments(builtin(spec), 32, 7, {3, 0}, 4);
    REQUIRE(lt.dist_moments[0] == Approx(lt.green_x0).epsilon(1e-10));
    // E L(L+1) = 2 G(x,0) G(0,0).
    REQUIRE(lt.dist_moments[1] + lt.dist_moments[0] == Approx(lt.moments[1]).epsilon(1e-10));
    // Power moments never exceed the factorial-moment expression.
    for (std::size_t k = 0; k < 4; ++k) REQUIRE(lt.dist_moments[k] <= lt.moments[k] * (1 + 1e-12));
    REQUIRE(lt.tail(1) == Approx(lt.entry_prob()));
    REQUIRE(lt.tail(3) == Approx(lt.entry_prob() * lt.return_prob() * lt.return_prob()));
  }
  CHECK_THROWS_AS(local_time_moments(srw(), 32, 8, {0, 0}, 2), GeometryError);
}

TEST_CASE("annulus jump-over probabilities") {
  // A unit step cannot cross an annulus of width >= 1.
  const auto st = annulus_stats(srw(), Ambient::torus(40), 6, 3);
  CHECK(st.psi == 0.0);
  REQUIRE(st.sigma);
  CHECK(*st.sigma == 0.0);
  const auto heavy = annulus_stats(power_law(1, 64), Ambient::plane(), 8, 2);
  CHECK(heavy.psi > 0);
  CHECK(heavy.psi <= heavy.psi_sup_a);
  const auto wider = annulus_stats(power_law(1, 64), Ambient::plane(), 8, 4);
  CHECK(wider.psi < heavy.psi);
  CHECK_THROWS_WITH(annulus_stats(srw(), Ambient::torus(32), 6, 3),
                    Catch::Matchers::ContainsSubstring("n + s must be < K/4"));
}

TEST_CASE("entrance and external Green values") {
  const Region target = Region::disc({0, 0}, 2);
  const auto et = entrance_times(srw(), Ambient::torus(16), target, std::nullopt);
  CHECK(et.at({5, 0}) > 0);
  CHECK(et.at({8, 8}) >= et.at({3, 0}));
  CHECK_THROWS_AS(entrance_times(srw(), Ambient::plane(), target, std::nullopt), GeometryError);
  const auto capped = entrance_times(srw(), Ambient::plane(), target, Region::disc({0, 0}, 20));
  const auto capped2 = entrance_times(srw(), Ambient::plane(), target, Region::disc({0, 0}, 40));
  CHECK(capped2.at({5, 0}) > capped.at({5, 0}));
  const double g = external_green(srw(), 32, 2, {5, 0});
  CHECK(g >= 1.0);
  CHECK(external_green_diag(srw(), 32, 2, {{5, 0}})[0] == Approx(g).epsilon(1e-10));
  CHECK_THROWS_AS(external_green(srw(), 32, 2, {1, 0}), GeometryError);
}
