#include <catch_amalgamated.hpp>

#include <discwalk/verification.hpp>

#include <set>
#include <sstream>

using namespace discwalk;

namespace {

GridFile grid_of(const std::string& text) {
  std::istringstream in(text);
  return parse_grid(in);
}

std::string csv_of(const std::vector<CheckResult>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

}  // namespace

TEST_CASE("grid parsing, merging and hashing") {
  const GridFile g = grid_of("# comment\nlaws = srw\n[escape-bounds]\nn = 4, 8 # trailing\n[other]\nn=1\n");
  const SweepGrid s = g.for_check("escape-bounds");
  CHECK(s.laws("x") == std::vector<std::string>{"srw"});
  CHECK(s.reals("n", "1") == std::vector<double>{4, 8});
  CHECK(g.for_check("unlisted").reals("n", "3") == std::vector<double>{3});
  CHECK(g.hash().size() == 16);
  CHECK(g.hash() == grid_of(g.canonical()).hash());
  CHECK(g.hash() != grid_of("laws = srw\n").hash());
  // Whitespace and comments do not change the canonical form.
  CHECK(grid_of("laws=srw\n[escape-bounds]\nn=4, 8\n[other]\nn = 1").hash() == g.hash());
  CHECK_THROWS_AS(grid_of("[broken\n"), GridError);
  CHECK_THROWS_AS(grid_of("novalue\n"), GridError);
  CHECK(grid_of("[a]\np = 1:2, 3:4\n").for_check("a").tuples("p", "", 2) ==
        std::vector<std::vector<double>>{{1, 2}, {3, 4}});
  CHECK_THROWS_AS(grid_of("[a]\np = 1:2:3\n").for_check("a").tuples("p", "", 2), GridError);
}

TEST_CASE("bundled grids parse") {
  const GridFile def = load_grid(DISCWALK_SOURCE_DIR "/grids/default.grid");
  for (const auto& c : registry()) CHECK(def.sections.count(c.id) == 1);
  CHECK_NOTHROW(load_grid(DISCWALK_SOURCE_DIR "/grids/finite_range.grid"));
  CHECK_THROWS_AS(load_grid("/nonexistent.grid"), GridError);
}

TEST_CASE("registry ids are unique and every check is reachable") {
  std::set<std::string> ids;
  for (const auto& c : registry()) {
    CHECK(ids.insert(c.id).second);
    CHECK_FALSE(c.claim.empty());
    CHECK(&find_check(c.id) == &c);
  }
  CHECK(ids.size() == 19);
  CHECK_THROWS_AS(find_check("no-such-check"), UnknownCheck);
}

TEST_CASE("CSV formatting") {
  CHECK(format_number(2.0 / 3.0) == "0.666666666667");
  CHECK(format_number(std::nan("")).empty());
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("plain") == "plain");
  const std::string text = csv_of({});
  CHECK(text.rfind(kCheckCsvHeader, 0) == 0);
}

TEST_CASE("finite-range toral correction is exactly zero") {
  const GridFile g = grid_of("[hit-zero-first]\nlaws = srw\nn = 7\nK = 32,64\n");
  const auto rows = run_check("hit-zero-first", g);
  const auto s = summarize_rows(rows);
  CHECK(s.failures == 0);
  CHECK(s.passes == rows.size());
  for (const auto& r : rows)
    if (r.K) CHECK(r.measured == 0.0);
}

TEST_CASE("infeasible points are skipped with a reason") {
  const GridFile g = grid_of("[hit-zero-first]\nlaws = srw\nn = 7, 9\nK = 32\n");
  const auto rows = run_check("hit-zero-first", g);
  bool skipped = false;
  for (const auto& r : rows)
    if (r.verdict == Verdict::Skip) {
      skipped = true;
      CHECK_THAT(r.note, Catch::Matchers::ContainsSubstring("K/4"));
    }
  CHECK(skipped);
}

TEST_CASE("escape-bounds passes for all three builtin laws") {
  const GridFile g = grid_of("[escape-bounds]\nn = 4, 8\n");
  const auto s = summarize_rows(run_check("escape-bounds", g));
  CHECK(s.failures == 0);
  CHECK(s.passes > 0);
}

TEST_CASE("a violated claim fails") {
  // Finite-n slopes never hit 2/pi exactly, so a zero tolerance must fail.
  const GridFile g = grid_of("[green-zero-asymptotic]\nlaws = srw\nn = 4, 8, 16\ntolerance = 0\n");
  const auto s = summarize_rows(run_check("green-zero-asymptotic", g));
  CHECK(s.failures > 0);
}

TEST_CASE("runs are deterministic and worker invariant") {
  const GridFile g = grid_of(
      "[escape-bounds]\nn = 4, 6\n[hit-zero-first]\nn = 3\nK = 16, 20, 24\n[local-time]\ngeometry = 32:7\n"
      "[entrance-toral]\nK = 16, 24, 32\n");
  const std::vector<std::string> ids{"escape-bounds", "hit-zero-first", "local-time", "entrance-toral"};
  const auto a = run_checks(ids, g, 1);
  const auto b = run_checks(ids, g, 4);
  CHECK(csv_of(a.rows()) == csv_of(b.rows()));
  const auto ja = summary_json(a), jb = summary_json(b);
  CHECK(ja["grid_hash"] == g.hash());
  for (const auto& id : ids) {
    CHECK(ja["checks"][id]["points"] == jb["checks"][id]["points"]);
    CHECK(ja["checks"][id]["constants"] == jb["checks"][id]["constants"]);
  }
}
