// Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion.
// With --known-failures, exits 0 iff exactly the listed criteria fail.

#include <discwalk/discwalk.hpp>

#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace dw = discwalk;
using dw::Point;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) { return dw::format_number(v); }

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  return worst;
}

Outcome hand_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const dw::Region D = dw::Region::disc({0, 0}, 1);
  const dw::Domain dom = dw::Domain::of(D, dw::Ambient::plane());
  const double E = dw::expected_exit_time(dw::srw(), dom, {0, 0});
  const double G = dw::green(dw::srw(), dom)({0, 0}, {0, 0});
  dw::StopSpec spec;
  spec.conditions = {dw::leaves(D)};
  spec.local_time_at = Point{0, 0};
  dw::EstimateOptions o;
  o.n_samples = 100000;
  o.master_seed = 1;
  o.workers = 8;
  const auto mt = dw::estimate(dw::srw(), {0, 0}, spec, dw::Statistic::Time, o);
  const auto ml = dw::estimate(dw::srw(), {0, 0}, spec, dw::Statistic::LocalTime, o);
  const double secs = elapsed(t0);
  const bool ok = std::abs(E - 8.0 / 3.0) <= 1e-10 && std::abs(G - 4.0 / 3.0) <= 1e-10 &&
                  std::abs(mt.mean - 8.0 / 3.0) <= 3 * mt.std_error && std::abs(ml.mean - 4.0 / 3.0) <= 3 * ml.std_error &&
                  secs < 60;
  return {ok, "E=" + num(E) + " G=" + num(G) + " MC E=" + num(mt.mean) + "+-" + num(mt.std_error) + " MC G=" +
                  num(ml.mean) + "+-" + num(ml.std_error) + " (tol 1e-10, 3 stderr) " + num(secs) + "s"};
}

Outcome escape_bounds() {
  const auto t0 = std::chrono::steady_clock::now();
  long violations = 0, starts = 0;
  for (const auto& spec : {"srw", "lazy_srw(0.3)", "power_law(1,64)"}) {
    const dw::StepLaw law = dw::builtin(spec);
    const double g2 = dw::validate(law).gamma_sq;
    for (double n : {8.0, 16.0, 32.0, 64.0}) {
      const dw::AbsorbingChain chain(law, dw::Domain::of(dw::Region::disc({0, 0}, n), dw::Ambient::plane()));
      const auto E = dw::expected_exit_times(chain);
      for (std::size_t i = 0; i < E.size(); ++i) {
        const double lo = (n * n - static_cast<double>(chain.domain().states()[i].norm2())) / g2;
        violations += E[i] < lo || E[i] > lo + 2 * n + 1;
        ++starts;
      }
    }
  }
  const double secs = elapsed(t0);
  return {violations == 0 && secs < 300,
          std::to_string(violations) + " violations over " + std::to_string(starts) + " starts, " + num(secs) + "s"};
}

Outcome finite_range_equality() {
  double worst = 0;
  const dw::StepLaw law = dw::srw();
  for (auto [K, n] : {std::pair<std::int64_t, double>{32, 7}, {64, 15}}) {
    const dw::Region D = dw::Region::disc({0, 0}, n);
    const dw::Ambient tor = dw::Ambient::torus(K), pl = dw::Ambient::plane();
    const dw::AbsorbingChain ct(law, dw::Domain::of(D, tor)), cp(law, dw::Domain::of(D, pl));
    if (ct.domain().states() != cp.domain().states()) return {false, "toral and planar discs differ"};
    worst = std::max(worst, max_rel_diff(dw::expected_exit_times(ct), dw::expected_exit_times(cp)));
    const auto gt = dw::green(ct), gp = dw::green(cp);
    double gmax = 0, gdiff = 0;
    for (std::size_t i = 0; i < ct.size(); ++i)
      for (std::size_t j = 0; j < ct.size(); ++j) {
        gmax = std::max(gmax, gp.at(i, j));
        gdiff = std::max(gdiff, std::abs(gt.at(i, j) - gp.at(i, j)));
      }
    worst = std::max(worst, gdiff / gmax);
    const auto zero = dw::Region::points({{0, 0}});
    const auto ht = dw::hit_before_all(law, tor, zero, D.complement());
    const auto hp = dw::hit_before_all(law, pl, zero, D.complement());
    double hdiff = 0;
    for (std::size_t i = 0; i < hp.prob.size(); ++i) hdiff = std::max(hdiff, std::abs(ht.prob[i] - hp.prob[i]));
    worst = std::max(worst, hdiff);
  }
  return {worst <= 1e-10, "max relative difference " + num(worst) + " (tol 1e-10) at (32,7), (64,15)"};
}

Outcome green_zero() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ns{16, 32, 64, 128, 256}, G;
  for (double n : ns) {
    const dw::AbsorbingChain chain(dw::srw(), dw::Domain::of(dw::Region::disc({0, 0}, n), dw::Ambient::plane()));
    G.push_back(dw::value_at(chain, dw::green_column(chain, {0, 0}), {0, 0}));
  }
  const auto f = dw::fit_constant(dw::FitModel::AffineInLog, ns, G);
  const double target = 2 / std::numbers::pi;
  // Residuals of the fixed-slope model G - (2/pi) log n - C shrink as their
  // successive differences shrink.
  std::vector<double> steps;
  for (std::size_t i = 1; i < ns.size(); ++i)
    steps.push_back(std::abs((G[i] - target * std::log(ns[i])) - (G[i - 1] - target * std::log(ns[i - 1]))));
  bool nonincreasing = true;
  for (std::size_t i = 1; i < steps.size(); ++i) nonincreasing &= steps[i] <= steps[i - 1];
  const double rel = std::abs(f.slope / target - 1);
  const double secs = elapsed(t0);
  return {rel <= 0.02 && nonincreasing && secs < 600,
          "slope " + num(f.slope) + " vs " + num(target) + " (rel err " + num(rel) + ", tol 0.02), residual steps " +
              (nonincreasing ? "nonincreasing" : "increasing") + ", " + num(secs) + "s"};
}

double gamblers_error(double r, double R) {
  const auto hb = dw::hit_before_all(dw::srw(), dw::Ambient::plane(), dw::Region::disc({0, 0}, r),
                                     dw::Region::disc({0, 0}, R).complement());
  double worst = 0;
  for (std::size_t i = 0; i < hb.prob.size(); ++i) {
    const double rx = hb.chain.domain().states()[i].norm();
    if (!(rx > r && rx < R)) continue;
    worst = std::max(worst, std::abs(hb.prob[i] - std::log(R / rx) / std::log(R / r)));
  }
  return worst;
}

Outcome gamblers() {
  const auto shape = [](double r, double R) { return std::pow(r, -0.25) / std::log(R / r); };
  const double A = gamblers_error(8, 64) / shape(8, 64);
  std::ostringstream d;
  d << "A=" << num(A);
  bool ok = true;
  for (auto [r, R] : {std::pair{16.0, 128.0}, {32.0, 256.0}}) {
    const double e = gamblers_error(r, R), b = A * shape(r, R);
    ok &= e <= b;
    d << "; (" << r << "," << R << ") err " << num(e) << " <= " << num(b);
  }
  return {ok, d.str()};
}

Outcome local_time() {
  double worst_power = 0, worst_rising = 0;
  bool tail_ok = true;
  std::ostringstream d;
  for (const auto& spec : {"srw", "power_law(1,64)"}) {
    const auto lt = dw::local_time_moments(dw::builtin(spec), 32, 7, {0, 0}, 4);
    for (std::size_t k = 0; k < 4; ++k) worst_power = std::max(worst_power, std::abs(lt.dist_moments[k] / lt.moments[k] - 1));
    // E L(L+1)...(L+k-1) from the geometric law, summed directly.
    const double q = lt.entry_prob(), rr = lt.return_prob();
    for (int k = 1; k <= 4; ++k) {
      double acc = 0;
      for (long m = 1; m < 200000; ++m) {
        double rising = 1;
        for (int j = 0; j < k; ++j) rising *= static_cast<double>(m + j);
        acc += rising * q * std::pow(rr, static_cast<double>(m - 1)) * (1 - rr);
      }
      worst_rising = std::max(worst_rising, std::abs(acc / lt.moments[static_cast<std::size_t>(k - 1)] - 1));
    }
    // One c fitted over z in 1..5 must also cover z in 6..10.
    const auto ratio = [&](int z) { return lt.tail(z * lt.green_00) / (std::sqrt(double(z)) * std::exp(-double(z))); };
    double c = 0;
    for (int z = 1; z <= 5; ++z) c = std::max(c, ratio(z));
    for (int z = 6; z <= 10; ++z) tail_ok &= ratio(z) <= c;
    d << spec << " c=" << num(c) << "; ";
  }
  const bool identity = worst_power <= 1e-8;
  d << "E L^k vs k! G(x,0) G(0,0)^(k-1): max rel err " << num(worst_power) << " (tol 1e-8); rising-factorial form: "
    << num(worst_rising) << "; tail envelope " << (tail_ok ? "holds" : "fails");
  return {identity && tail_ok, d.str()};
}

Outcome annulus_psi() {
  const dw::StepLaw law = dw::power_law(1, 64);
  const double n = 32;
  std::vector<double> ss{4, 8, 16, 32}, psi;
  std::ostringstream d;
  bool toral_ok = true;
  for (double s : ss) {
    psi.push_back(dw::annulus_stats(law, dw::Ambient::plane(), n, s, {}, true).psi);
    try {
      const double t = dw::annulus_stats(law, dw::Ambient::torus(256), n, s, {}, true).psi;
      const double rel = std::abs(t / psi.back() - 1);
      toral_ok &= rel <= 0.1;
      d << "s=" << s << " toral rel diff " << num(rel) << "; ";
    } catch (const dw::GeometryError& e) {
      d << "s=" << s << " toral infeasible (" << e.what() << "); ";
    }
  }
  const double slope = dw::fit_constant(dw::FitModel::PowerLawSlope, ss, psi).slope;
  d << "planar slope " << num(slope) << " (target -4 +- 0.5), n=32";
  return {std::abs(slope + 4) <= 0.5 && toral_ok, d.str()};
}

Outcome entrance() {
  std::ostringstream d;
  std::vector<double> Ns{32, 64, 128, 256}, E;
  for (double N : Ns)
    E.push_back(dw::entrance_time(dw::srw(), dw::Ambient::plane(), dw::Region::disc({0, 0}, 4), {8, 0},
                                  dw::Region::disc({0, 0}, N)));
  bool increasing = true;
  for (std::size_t i = 1; i < E.size(); ++i) increasing &= E[i] > E[i - 1];
  const double lin = dw::ols(Ns, E).slope;
  d << "planar E " << num(E.front()) << ".." << num(E.back()) << (increasing ? " increasing" : " not increasing")
    << ", slope " << num(lin);
  bool ok = increasing && lin > 0;
  for (const auto& spec : {"srw", "power_law(1,64)"}) {
    const dw::StepLaw law = dw::builtin(spec);
    const double g2 = dw::validate(law).gamma_sq;
    std::vector<double> Ks{32, 64, 128}, sups;
    long violations = 0;
    for (double Kd : Ks) {
      const auto K = static_cast<std::int64_t>(Kd);
      const double n = Kd / 8;
      const auto et = dw::entrance_times(law, dw::Ambient::torus(K), dw::Region::disc({0, 0}, n), std::nullopt);
      for (std::size_t i = 0; i < et.chain.size(); ++i) {
        const double ry = std::sqrt(static_cast<double>(dw::torus_norm2(et.chain.domain().states()[i], K)));
        violations += et.times[i] < (ry - n) * (ry - n) / g2 * (1 - 1e-10);
      }
      sups.push_back(et.sup());
    }
    const double expo = dw::fit_constant(dw::FitModel::PowerLawSlope, Ks, sups).slope;
    ok &= std::abs(expo - 2) <= 0.3 && violations == 0;
    d << "; " << spec << " exponent " << num(expo) << " (2 +- 0.3), lower-bound violations " << violations;
  }
  return {ok, d.str()};
}

int run_cli(const std::string& cli, const std::string& args, std::string* out) {
  const std::string tmp = (std::filesystem::temp_directory_path() / "discwalk_acceptance_cli.txt").string();
  const int rc = std::system((cli + " " + args + " > " + tmp + " 2>/dev/null").c_str());
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism(const std::string& cli, const std::string& grid) {
  if (cli.empty()) return {false, "no --cli given"};
  std::ostringstream d;
  bool ok = true;
  std::string a, b;
  const int ra = run_cli(cli, "verify --all --grid " + grid + " --workers 1", &a);
  const int rb = run_cli(cli, "verify --all --grid " + grid + " --workers 8", &b);
  ok &= ra == 0 && rb == 0 && a == b && !a.empty();
  d << "verify --all exit " << ra << "/" << rb << (a == b ? " identical" : " DIFFERENT");
  const std::vector<std::string> mc = {
      "mc escape --law 'power_law(1,64)' --K 24 --n 5 --start 0,0 --samples 20000 --seed 3",
      "mc entry --law srw --K 32 --n 4 --start 12,0 --samples 5000 --seed 5",
      "mc gamblers --law srw --r 5 --R 25 --start 11,0 --samples 100000 --seed 7",
      "mc local-time --law 'power_law(1,64)' --K 32 --n 7 --start 3,0 --samples 20000 --seed 9",
      "mc worst-case --law 'power_law(1,64)' --K 24 --n 5 --start 0,0 --ystar 2,0 --samples 5000 --seed 2"};
  for (const auto& cmd : mc) {
    const int r1 = run_cli(cli, cmd + " --workers 1", &a);
    const int r8 = run_cli(cli, cmd + " --workers 8", &b);
    const bool same = r1 == r8 && a == b && !a.empty();
    ok &= same;
    d << "; " << cmd.substr(0, cmd.find(" --")) << (same ? " identical" : " DIFFERENT");
  }
  return {ok, d.str()};
}

struct McCase {
  std::string name;
  dw::StepLaw law;
  Point start;
  dw::StopSpec spec;
  dw::Statistic stat;
  double exact;
  std::size_t samples;
};

Outcome coherence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<McCase> cases;
  for (const auto& s : {"srw", "lazy_srw(0.3)", "power_law(1,64)"}) {
    const dw::StepLaw law = dw::builtin(s);
    const dw::Region D = dw::Region::disc({0, 0}, 8);
    dw::StopSpec spec;
    spec.conditions = {dw::leaves(D)};
    const double ex = dw::expected_exit_time(law, dw::Domain::of(D, dw::Ambient::plane()), {0, 0});
    cases.push_back({std::string("escape ") + s + " n=8", law, {0, 0}, spec, dw::Statistic::Time, ex, 2000});
  }
  {
    const dw::StepLaw law = dw::power_law(1, 64);
    const dw::Ambient amb = dw::Ambient::torus(24);
    const dw::Region D = dw::Region::disc({0, 0}, 5);
    dw::StopSpec spec;
    spec.ambient = amb;
    spec.conditions = {dw::leaves(D)};
    const double ex = dw::expected_exit_time(law, dw::Domain::of(D, amb), {0, 0});
    cases.push_back({"toral escape power_law K=24 n=5", law, {0, 0}, spec, dw::Statistic::Time, ex, 2000});
  }
  for (const auto& s : {"srw", "power_law(1,64)"}) {
    const dw::StepLaw law = dw::builtin(s);
    const dw::Ambient amb = dw::Ambient::torus(68);
    const dw::Region in = dw::Region::disc({0, 0}, 4), out = dw::Region::disc({0, 0}, 16);
    dw::StopSpec spec;
    spec.ambient = amb;
    spec.conditions = {dw::enters(in), dw::leaves(out)};
    const double ex = dw::hit_before(law, amb, in, out.complement(), {8, 0});
    cases.push_back({std::string("toral gamblers ") + s + " 4:16", law, {8, 0}, spec, dw::Statistic::Indicator, ex, 2000});
  }
  for (const auto& s : {"srw", "power_law(1,64)"}) {
    const dw::StepLaw law = dw::builtin(s);
    dw::StopSpec spec;
    spec.ambient = dw::Ambient::torus(32);
    spec.conditions = {dw::leaves(dw::Region::disc({0, 0}, 7))};
    spec.local_time_at = Point{0, 0};
    const double ex = dw::local_time_moments(law, 32, 7, {3, 0}, 1).green_x0;
    cases.push_back({std::string("local time ") + s + " (32,7)", law, {3, 0}, spec, dw::Statistic::LocalTime, ex, 2000});
  }
  {
    const dw::StepLaw law = dw::srw();
    const dw::Ambient amb = dw::Ambient::torus(32);
    const dw::Region target = dw::Region::disc({0, 0}, 4);
    dw::StopSpec spec;
    spec.ambient = amb;
    spec.conditions = {dw::enters(target)};
    const double ex = dw::entrance_time(law, amb, target, {12, 0});
    cases.push_back({"toral entrance srw K=32 n=4", law, {12, 0}, spec, dw::Statistic::Time, ex, 1000});
  }
  std::ostringstream d;
  bool ok = true;
  for (const auto& c : cases) {
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      dw::EstimateOptions o;
      o.n_samples = c.samples;
      o.master_seed = seed;
      o.workers = 8;
      const auto e = dw::estimate(c.law, c.start, c.spec, c.stat, o);
      within += std::abs(e.mean - c.exact) <= 4 * e.std_error;
    }
    ok &= within >= 99;
    d << c.name << " " << within << "/100; ";
  }
  d << num(elapsed(t0)) << "s";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, grid;
  std::vector<int> known;
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the discwalk binary (criterion 9)");
  app.add_option("--grid", grid, "default grid file (criterion 9)");
  app.add_option("--known-failures", known, "criteria expected to fail");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::array<std::pair<const char*, std::function<Outcome()>>, 10> criteria{{
      {"hand-solvable oracle", hand_oracle},
      {"escape-bounds", escape_bounds},
      {"finite-range toral equality", finite_range_equality},
      {"green-zero-asymptotic", green_zero},
      {"gamblers-ruin", gamblers},
      {"local-time", local_time},
      {"annulus-psi", annulus_psi},
      {"entrance", entrance},
      {"determinism and parallel invariance", [&] { return determinism(cli, grid); }},
      {"cross-method coherence", coherence},
  }};
  std::set<int> failed;
  for (int i = 0; i < 10; ++i) {
    const int id = i + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome r;
    try {
      r = criteria[static_cast<std::size_t>(i)].second();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    if (!r.pass) failed.insert(id);
    std::cout << "criterion " << id << " " << (r.pass ? "PASS" : "FAIL") << " " << criteria[static_cast<std::size_t>(i)].first
              << ": " << r.detail << std::endl;
  }
  std::set<int> expected;
  for (int k : known)
    if (only.empty() || std::find(only.begin(), only.end(), k) != only.end()) expected.insert(k);
  if (failed != expected) {
    std::cout << "unexpected outcome: failing set differs from --known-failures\n";
    return 1;
  }
  return 0;
}
