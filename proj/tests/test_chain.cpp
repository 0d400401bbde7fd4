#include <catch_amalgamated.hpp>

#include <discwalk/exact.hpp>

using namespace discwalk;

namespace {

// u = 1 + P_A u by fixed-point iteration; an independent route to exit times.
std::vector<double> iterate_exit_times(const StepLaw& law, const Domain& dom, int sweeps) {
  std::vector<double> u(dom.size(), 0.0), next(dom.size());
  const auto& amb = dom.ambient();
  for (int it = 0; it < sweeps; ++it) {
    for (std::size_t i = 0; i < dom.size(); ++i) {
      double acc = 1.0;
      for (const auto& a : law.atoms()) {
        const auto j = dom.index_of(amb.canonical(dom.states()[i] + a.step));
        if (j >= 0) acc += a.mass * u[static_cast<std::size_t>(j)];
      }
      next[i] = acc;
    }
    u.swap(next);
  }
  return u;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

SolverOptions force(Backend b) {
  SolverOptions o;
  if (b != Backend::Dense) o.dense_limit = 0;
  if (b == Backend::FftCg) o.short_range_atoms = 0;
  return o;
}

}  // namespace

TEST_CASE("exit times match fixed-point iteration") {
  const Domain dom = Domain::of(Region::disc({0, 0}, 4), Ambient::plane());
  const AbsorbingChain chain(srw(), dom);
  const auto direct = expected_exit_times(chain);
  const auto iter = iterate_exit_times(srw(), dom, 4000);
  CHECK(max_rel_diff(direct, iter) < 1e-9);
}

TEST_CASE("the three backends agree on the plane") {
  for (const auto& spec : {"srw", "lazy_srw(0.3)", "power_law(1,16)"}) {
    const StepLaw law = builtin(spec);
    const Domain dom = Domain::of(Region::disc({0, 0}, 12), Ambient::plane());
    const AbsorbingChain dense(law, dom, force(Backend::Dense));
    const AbsorbingChain sparse(law, dom, force(Backend::SparseDirect));
    const AbsorbingChain fft(law, dom, force(Backend::FftCg));
    REQUIRE(dense.backend() == Backend::Dense);
    REQUIRE(fft.backend() == Backend::FftCg);
    const auto e = expected_exit_times(dense);
    if (law.atoms().size() <= 64) {
      REQUIRE(sparse.backend() == Backend::SparseDirect);
      CHECK(max_rel_diff(expected_exit_times(sparse), e) < 1e-10);
    }
    CHECK(max_rel_diff(expected_exit_times(fft), e) < 1e-10);
  }
}

TEST_CASE("toral FFT agrees with dense in both the tight and the periodic layout") {
  const StepLaw law = power_law(1, 64);
  const Ambient amb = Ambient::torus(40);
  // Small disc: box well under K/2, padded tight grid.
  const Domain disc = Domain::of(Region::disc({0, 0}, 9), amb);
  CHECK(max_rel_diff(expected_exit_times(AbsorbingChain(law, disc, force(Backend::FftCg))),
                     expected_exit_times(AbsorbingChain(law, disc, force(Backend::Dense)))) < 1e-10);
  // Complement of a disc: spans the torus, periodic grid.
  const Region target = Region::disc({0, 0}, 3);
  const Domain outside(amb, transient_points(amb, {&target}));
  SolverOptions big = force(Backend::Dense);
  big.dense_limit = 5000;
  CHECK(max_rel_diff(expected_exit_times(AbsorbingChain(law, outside, force(Backend::FftCg))),
                     expected_exit_times(AbsorbingChain(law, outside, big))) < 1e-10);
}

TEST_CASE("residual is reported and the state cap is enforced") {
  const AbsorbingChain chain(srw(), Domain::of(Region::disc({0, 0}, 6), Ambient::plane()));
  expected_exit_times(chain);
  CHECK(chain.last_residual() <= 1e-10);
  SolverOptions tiny;
  tiny.max_states = 10;
  CHECK_THROWS_AS(AbsorbingChain(srw(), Domain::of(Region::disc({0, 0}, 6), Ambient::plane()), tiny), DimensionTooLarge);
}

TEST_CASE("domain canonicalizes toral points and rejects duplicates") {
  CHECK_THROWS_AS(Domain(Ambient::plane(), {{0, 0}, {0, 0}}), GeometryError);
  CHECK_THROWS_AS(Domain(Ambient::torus(8), {{6, 0}, {-2, 0}}), GeometryError);
  CHECK(Domain(Ambient::torus(8), {{6, 0}}).states().front() == Point{-2, 0});
  const Domain d(Ambient::torus(8), {{0, 0}, {-4, 3}});
  CHECK(d.contains({4, 3}));
  CHECK(d.index_of({1, 1}) < 0);
}
