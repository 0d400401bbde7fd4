#include <catch_amalgamated.hpp>

#include <discwalk/report.hpp>

#include <sstream>

using namespace discwalk;

namespace {

CsvTable table_of(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

}  // namespace

TEST_CASE("CSV reading handles quoting") {
  const auto t = table_of("a,b,c\n1,\"x,y\",\"q\"\"q\"\n2,,3\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[0][2] == "q\"q");
  CHECK(t.rows[1][1].empty());
  CHECK(t.column("c") == 2);
  CHECK(t.column("z") == -1);
  CHECK_THROWS_AS(t.require_column("z"), ReportError);
  CHECK_THROWS_AS(table_of(""), ReportError);
  CHECK_THROWS_AS(parse_csv_line("\"open"), ReportError);
}

TEST_CASE("numeric cells") {
  CHECK(numeric_cell("1.5e2") == 150.0);
  CHECK_FALSE(numeric_cell(""));
  CHECK_FALSE(numeric_cell("pass"));
  CHECK_FALSE(numeric_cell("3x"));
}

TEST_CASE("series grouping, filtering and sorting") {
  const auto t = table_of("law,n,v,verdict\nsrw,32,3,pass\nsrw,16,2,pass\npl,16,5,pass\npl,32,,pass\nsrw,64,9,fail\n");
  const auto s = series_from_csv(t, "n", "v", "law", {{"verdict", "pass"}});
  REQUIRE(s.size() == 2);
  CHECK(s[0].label == "srw");
  CHECK(s[0].points == std::vector<std::pair<double, double>>{{16, 2}, {32, 3}});
  CHECK(s[1].points.size() == 1);
  const auto one = series_from_csv(t, "n", "v", "");
  REQUIRE(one.size() == 1);
  CHECK(one[0].points.size() == 4);
}

TEST_CASE("SVG output is deterministic and complete") {
  const std::vector<PlotSeries> s{{"a<b", {{1, 1}, {10, 100}}}, {"c", {{2, 3}}}};
  PlotSpec spec;
  spec.title = "t";
  spec.log_x = spec.log_y = true;
  const std::string svg = render_svg(s, spec);
  CHECK(svg == render_svg(s, spec));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("<path") != std::string::npos);
  spec.lines = false;
  CHECK(render_svg(s, spec).find("<path") == std::string::npos);
  CHECK_THROWS_AS(render_svg({{"neg", {{-1, -1}}}}, spec), ReportError);
}
