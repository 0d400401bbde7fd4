// discwalk command-line front end. Every subcommand prints CSV on stdout
// (and to --out when given); exit codes: 0 ok, 1 failed check, 2 usage or
// configuration error, 3 numerical failure or flagged estimate.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <discwalk/discwalk.hpp>

namespace dw = discwalk;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3;

struct Options {
  std::string law = "srw";
  std::int64_t K = 0;  // 0: plane
  double n = -1, s = -1, r = -1, R = -1, cap = -1;
  std::vector<std::string> start, target;
  std::string ystar = "0,0";
  std::int64_t t_max = 4096;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::int64_t step_cap = 100'000'000;
  bool with_exact = false;
  std::string out;

  // verify
  std::vector<std::string> checks;
  bool all = false;
  std::string grid;
  std::string summary;

  // report
  std::string from, plot, x_col, y_col = "measured", group_col = "law", out_dir = ".";
  std::vector<std::string> where;
  bool log_x = false, log_y = false, scatter = false;

  // law
  std::string law_file;
  std::size_t max_states = 300000;
  double residual_tol = 1e-10;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

dw::Point parse_point(const std::string& s) {
  const auto parts = dw::SweepGrid::split(s, ',');
  if (parts.size() != 2) throw UsageError("point '" + s + "' must be written x1,x2");
  try {
    return {std::stoll(parts[0]), std::stoll(parts[1])};
  } catch (const std::exception&) {
    throw UsageError("point '" + s + "' must have integer coordinates");
  }
}

std::vector<dw::Point> parse_points(const std::vector<std::string>& v) {
  std::vector<dw::Point> out;
  for (const auto& s : v) out.push_back(parse_point(s));
  return out;
}

std::string pt(dw::Point p) { return std::to_string(p.x1) + ";" + std::to_string(p.x2); }

/// A CSV table printed to stdout and mirrored to --out.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
  std::string str() const {
    std::ostringstream os;
    const auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << dw::csv_escape(cells[i]);
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }
};

void emit(const std::string& text, const std::string& out) {
  std::cout << text;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw UsageError("cannot write " + out);
    f << text;
  }
}

std::string num(double v) { return dw::format_number(v); }

dw::Ambient ambient(const Options& o) { return o.K > 0 ? dw::Ambient::torus(o.K) : dw::Ambient::plane(); }

dw::SolverOptions solver(const Options& o) {
  dw::SolverOptions s;
  s.max_states = o.max_states;
  s.residual_tol = o.residual_tol;
  return s;
}

void need(double v, const char* flag) {
  if (v < 0) throw UsageError(std::string("missing required flag ") + flag);
}

void need_disc(const Options& o) {
  need(o.n, "--n");
  if (o.K > 0) dw::require_toral_disc(o.n, o.K);
}

std::string k_text(const Options& o) { return o.K > 0 ? std::to_string(o.K) : ""; }

// ------------------------------------------------------------------ law

int cmd_law_list(const Options& o) {
  Table t{{"name"}, {}};
  for (const auto& n : dw::builtin_names()) t.add({n});
  emit(t.str(), o.out);
  return kOk;
}

int cmd_law_describe(const Options& o) {
  const dw::StepLaw law = o.law_file.empty() ? dw::resolve_law(o.law) : dw::load_law(o.law_file);
  const dw::LawStats st = dw::validate(law);
  Table t{{"law", "property", "value"}, {}};
  const auto add = [&](const std::string& k, double v) { t.add({law.name(), k, num(v)}); };
  add("atoms", static_cast<double>(law.atoms().size()));
  add("max_step", law.max_step());
  add("cov_scalar", st.cov_scalar);
  add("gamma_sq", st.gamma_sq);
  add("pi_gamma", st.pi_gamma);
  add("beta", st.beta);
  add("M", st.M);
  add("moment_M", st.moment_M);
  add("aperiodicity_power", st.aperiodicity_power);
  emit(t.str(), o.out);
  return kOk;
}

// ------------------------------------------------------------------ solve

int cmd_solve_exit_time(const Options& o) {
  need_disc(o);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  dw::AbsorbingChain chain(law, dw::Domain::of(dw::Region::disc({0, 0}, o.n), amb), solver(o));
  const auto E = dw::expected_exit_times(chain);
  Table t{{"law", "K", "n", "x", "exit_time"}, {}};
  const auto starts = o.start.empty() ? chain.domain().states() : parse_points(o.start);
  for (auto x : starts) {
    if (!chain.domain().contains(x)) throw dw::GeometryError("start " + dw::to_string(x) + " is not in D(0,n)");
    t.add({o.law, k_text(o), num(o.n), pt(x), num(dw::value_at(chain, E, amb.canonical(x)))});
  }
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_green(const Options& o) {
  need_disc(o);
  if (o.start.empty()) throw UsageError("solve green needs --start");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  dw::AbsorbingChain chain(law, dw::Domain::of(dw::Region::disc({0, 0}, o.n), amb), solver(o));
  Table t{{"law", "K", "n", "x", "y", "green"}, {}};
  const auto targets = o.target.empty() ? chain.domain().states() : parse_points(o.target);
  for (auto x : parse_points(o.start)) {
    if (!chain.domain().contains(x)) throw dw::GeometryError("start " + dw::to_string(x) + " is not in D(0,n)");
    // G(x,y) = G(y,x): one column at x serves every y.
    const auto col = dw::green_column(chain, amb.canonical(x));
    for (auto y : targets) {
      if (!chain.domain().contains(y)) throw dw::GeometryError("target " + dw::to_string(y) + " is not in D(0,n)");
      t.add({o.law, k_text(o), num(o.n), pt(x), pt(y), num(dw::value_at(chain, col, amb.canonical(y)))});
    }
  }
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_hitprob(const Options& o) {
  need(o.r, "--r");
  need(o.R, "--R");
  if (!(o.r < o.R)) throw dw::GeometryError("hitprob needs r < R");
  if (o.K > 0) dw::require_toral_disc(o.R, o.K);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const auto hb = dw::hit_before_all(law, amb, dw::Region::disc({0, 0}, o.r), dw::Region::disc({0, 0}, o.R).complement(),
                                     solver(o));
  Table t{{"law", "K", "r", "R", "x", "prob_inner_first"}, {}};
  const auto starts = o.start.empty() ? hb.chain.domain().states() : parse_points(o.start);
  for (auto x : starts) {
    if (!hb.chain.domain().contains(x)) throw dw::GeometryError("start " + dw::to_string(x) + " must satisfy r < |x| <= R");
    t.add({o.law, k_text(o), num(o.r), num(o.R), pt(x), num(hb.at(amb.canonical(x)))});
  }
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_hitdist(const Options& o) {
  need_disc(o);
  if (o.start.size() != 1) throw UsageError("solve hitdist needs exactly one --start");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const dw::Point x = parse_point(o.start[0]);
  const auto hd = dw::hitting_distribution(law, amb, dw::Region::disc({0, 0}, o.n).complement(), x, solver(o));
  Table t{{"law", "K", "n", "x", "y", "mass"}, {}};
  for (const auto& [y, m] : hd.mass) t.add({o.law, k_text(o), num(o.n), pt(x), pt(y), num(m)});
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_potential_kernel(const Options& o) {
  if (o.start.empty()) throw UsageError("solve potential-kernel needs --start points");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const auto pts = parse_points(o.start);
  const auto tab = dw::potential_kernel(law, pts, o.t_max);
  Table t{{"law", "x", "a", "t_max", "grid_radius", "oscillation", "flagged"}, {}};
  for (auto x : pts)
    t.add({o.law, pt(x), num(tab.at(x)), std::to_string(tab.t_max), std::to_string(tab.grid_radius),
           num(tab.last_oscillation()), tab.flagged ? "1" : "0"});
  emit(t.str(), o.out);
  return tab.flagged ? kNumerical : kOk;
}

int cmd_solve_external_green(const Options& o) {
  need(o.n, "--n");
  if (o.K <= 0) throw UsageError("external-green is toral: give --K");
  if (o.start.empty()) throw UsageError("solve external-green needs --start");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const auto xs = parse_points(o.start);
  const auto G = dw::external_green_diag(law, o.K, o.n, xs, solver(o));
  Table t{{"law", "K", "n", "x", "external_green"}, {}};
  for (std::size_t i = 0; i < xs.size(); ++i) t.add({o.law, k_text(o), num(o.n), pt(xs[i]), num(G[i])});
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_entrance(const Options& o) {
  need(o.n, "--n");
  if (o.K > 0) dw::require_toral_disc(o.n, o.K);
  if (o.K <= 0 && o.cap < 0) throw UsageError("planar entrance times need --cap N (the uncapped mean is infinite)");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  std::optional<dw::Region> cap;
  if (o.K <= 0) cap = dw::Region::disc({0, 0}, o.cap);
  const auto et = dw::entrance_times(law, amb, dw::Region::disc({0, 0}, o.n), cap, solver(o));
  Table t{{"law", "K", "n", "cap", "y", "entrance_time"}, {}};
  const auto starts = o.start.empty() ? et.chain.domain().states() : parse_points(o.start);
  for (auto y : starts) {
    if (!et.chain.domain().contains(y)) throw dw::GeometryError("start " + dw::to_string(y) + " is not a transient point");
    t.add({o.law, k_text(o), num(o.n), o.cap >= 0 ? num(o.cap) : "", pt(y), num(et.at(amb.canonical(y)))});
  }
  emit(t.str(), o.out);
  return kOk;
}

int cmd_solve_annulus_stats(const Options& o) {
  need(o.n, "--n");
  need(o.s, "--s");
  if (o.K > 0) dw::require_toral_annulus(o.n, o.s, o.K);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const auto a = dw::annulus_stats(law, ambient(o), o.n, o.s, solver(o), o.K <= 0);
  Table t{{"law", "K", "n", "s", "quantity", "value"}, {}};
  t.add({o.law, k_text(o), num(o.n), num(o.s), "psi", num(a.psi)});
  t.add({o.law, k_text(o), num(o.n), num(o.s), "psi_sup_a", num(a.psi_sup_a)});
  if (a.sigma) t.add({o.law, k_text(o), num(o.n), num(o.s), "sigma", num(*a.sigma)});
  emit(t.str(), o.out);
  return kOk;
}

// ------------------------------------------------------------------ mc

const std::vector<std::string> kEstimateHeader = {"quantity", "law", "K", "n", "r", "R", "x", "mean", "std_error",
                                                  "ci_lo", "ci_hi", "n_samples", "seed", "cap_hits", "flagged", "exact"};

std::vector<std::string> estimate_row(const std::string& q, const Options& o, dw::Point x, const dw::Estimate& e,
                                      std::optional<double> exact) {
  return {q,
          o.law,
          k_text(o),
          o.n >= 0 ? num(o.n) : "",
          o.r >= 0 ? num(o.r) : "",
          o.R >= 0 ? num(o.R) : "",
          pt(x),
          num(e.mean),
          num(e.std_error),
          num(e.ci_lo),
          num(e.ci_hi),
          std::to_string(e.n_samples),
          std::to_string(e.master_seed),
          std::to_string(e.cap_hits),
          e.flagged ? "1" : "0",
          exact ? num(*exact) : ""};
}

dw::EstimateOptions estimate_options(const Options& o) {
  dw::EstimateOptions e;
  e.n_samples = o.samples;
  e.master_seed = o.seed;
  e.workers = o.workers;
  return e;
}

dw::Point single_start(const Options& o) {
  if (o.start.size() != 1) throw UsageError("give exactly one --start");
  return parse_point(o.start[0]);
}

int finish_estimates(const Table& t, const std::vector<dw::Estimate>& es, const Options& o) {
  emit(t.str(), o.out);
  for (const auto& e : es)
    if (e.flagged) {
      std::cerr << "estimate flagged: " << e.cap_hits << " trajectories hit the step cap\n";
      return kNumerical;
    }
  return kOk;
}

int cmd_mc_escape(const Options& o) {
  need_disc(o);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const dw::Point x = single_start(o);
  const dw::Region D = dw::Region::disc({0, 0}, o.n);
  if (!D.contains(amb.canonical(x), amb)) throw dw::GeometryError("start must lie in D(0,n)");
  dw::StopSpec spec{amb, {dw::leaves(D)}, o.step_cap, std::nullopt};
  const auto e = dw::estimate(law, x, spec, dw::Statistic::Time, estimate_options(o));
  std::optional<double> exact;
  if (o.with_exact) exact = dw::expected_exit_time(law, dw::Domain::of(D, amb), amb.canonical(x), solver(o));
  Table t{kEstimateHeader, {}};
  t.add(estimate_row("exit_time", o, x, e, exact));
  return finish_estimates(t, {e}, o);
}

int cmd_mc_entry(const Options& o) {
  need(o.n, "--n");
  if (o.K <= 0 && o.cap < 0) throw UsageError("planar entry needs --cap N");
  if (o.K > 0) dw::require_toral_disc(o.n, o.K);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const dw::Point y = single_start(o);
  const dw::Region D = dw::Region::disc({0, 0}, o.n);
  dw::StopSpec spec{amb, {dw::enters(D)}, o.step_cap, std::nullopt};
  std::optional<dw::Region> cap;
  if (o.K <= 0) {
    cap = dw::Region::disc({0, 0}, o.cap);
    spec.conditions.push_back(dw::leaves(*cap, "cap"));
  }
  if (D.contains(amb.canonical(y), amb)) throw dw::GeometryError("start lies in the target disc");
  const auto e = dw::estimate(law, y, spec, dw::Statistic::Time, estimate_options(o));
  std::optional<double> exact;
  if (o.with_exact) exact = dw::entrance_time(law, amb, D, y, cap, solver(o));
  Table t{kEstimateHeader, {}};
  t.add(estimate_row("entrance_time", o, y, e, exact));
  return finish_estimates(t, {e}, o);
}

int cmd_mc_gamblers(const Options& o) {
  need(o.r, "--r");
  need(o.R, "--R");
  if (!(o.r < o.R)) throw dw::GeometryError("gamblers needs r < R");
  if (o.K > 0) dw::require_toral_disc(o.R, o.K);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const dw::Point x = single_start(o);
  const dw::Region inner = dw::Region::disc({0, 0}, o.r), outer = dw::Region::disc({0, 0}, o.R);
  const dw::Point cx = amb.canonical(x);
  if (inner.contains(cx, amb) || !outer.contains(cx, amb)) throw dw::GeometryError("start must satisfy r < |x| <= R");
  dw::StopSpec spec{amb, {dw::enters(inner, "inner"), dw::leaves(outer, "outer")}, o.step_cap, std::nullopt};
  auto opt = estimate_options(o);
  opt.indicator = 0;
  const auto e = dw::estimate(law, x, spec, dw::Statistic::Indicator, opt);
  std::optional<double> exact;
  if (o.with_exact) exact = dw::hit_before(law, amb, inner, outer.complement(), x, solver(o));
  Table t{kEstimateHeader, {}};
  t.add(estimate_row("prob_inner_first", o, x, e, exact));
  return finish_estimates(t, {e}, o);
}

int cmd_mc_local_time(const Options& o) {
  need(o.n, "--n");
  if (o.K <= 0) throw UsageError("local-time is toral: give --K");
  dw::require_toral_disc(o.n, o.K);
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Ambient amb = ambient(o);
  const dw::Point x = single_start(o);
  const dw::Region D = dw::Region::disc({0, 0}, o.n);
  if (!D.contains(amb.canonical(x), amb)) throw dw::GeometryError("start must lie in D(0,n)");
  dw::StopSpec spec{amb, {dw::leaves(D)}, o.step_cap, dw::Point{0, 0}};
  const auto e = dw::estimate(law, x, spec, dw::Statistic::LocalTime, estimate_options(o));
  std::optional<double> exact;
  if (o.with_exact) exact = dw::local_time_moments(law, o.K, o.n, x, 1, solver(o)).green_x0;
  Table t{kEstimateHeader, {}};
  t.add(estimate_row("local_time_at_0", o, x, e, exact));
  return finish_estimates(t, {e}, o);
}

int cmd_mc_worst_case(const Options& o) {
  need(o.n, "--n");
  if (o.K <= 0) throw UsageError("worst-case needs --K");
  const dw::StepLaw law = dw::resolve_law(o.law);
  const dw::Point x = single_start(o);
  const auto w = dw::worst_case_estimate(law, o.K, o.n, parse_point(o.ystar), x, estimate_options(o));
  Table t{kEstimateHeader, {}};
  t.add(estimate_row("worst_case_tau", o, x, w.tau, std::nullopt));
  t.add(estimate_row("escape_time_sigma0", o, x, w.sigma0, std::nullopt));
  t.add(estimate_row("relocations", o, x, w.relocations, std::nullopt));
  return finish_estimates(t, {w.tau}, o);
}

// ------------------------------------------------------------------ verify / report

int cmd_verify(const Options& o) {
  if (o.all == !o.checks.empty()) throw UsageError("verify needs exactly one of --all or --check <id>");
  const dw::GridFile grid = o.grid.empty() ? dw::GridFile{} : dw::load_grid(o.grid);
  std::vector<std::string> ids = o.checks;
  if (o.all)
    for (const auto& c : dw::registry()) ids.push_back(c.id);
  dw::CheckContext ctx;
  ctx.solver = solver(o);
  const dw::VerificationRun run = dw::run_checks(ids, grid, o.workers, ctx);
  std::ostringstream csv;
  dw::write_csv(csv, run.rows());
  emit(csv.str(), o.out);
  if (!o.summary.empty()) {
    std::ofstream f(o.summary);
    if (!f) throw UsageError("cannot write " + o.summary);
    f << dw::summary_json(run).dump(2) << '\n';
  }
  for (std::size_t i = 0; i < run.ids.size(); ++i) {
    const auto s = dw::summarize_rows(run.results[i]);
    std::cerr << run.ids[i] << ": " << s.passes << " pass, " << s.failures << " fail, " << s.skips << " skip\n";
  }
  if (run.numerical_error()) return kNumerical;
  return run.all_pass() ? kOk : kCheckFailed;
}

int cmd_report(const Options& o) {
  std::ifstream in(o.from);
  if (!in) throw UsageError("cannot open " + o.from);
  const dw::CsvTable table = dw::read_csv(in);
  std::vector<std::pair<std::string, std::string>> filters;
  for (const auto& w : o.where) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw UsageError("--where expects column=value, got '" + w + "'");
    filters.emplace_back(w.substr(0, eq), w.substr(eq + 1));
  }
  std::string x_col = o.x_col;
  if (x_col.empty()) {
    // First parameter column with more than one distinct numeric value.
    for (const char* c : {"n", "K", "s", "r", "R"}) {
      const int idx = table.column(c);
      if (idx < 0) continue;
      std::set<std::string> seen;
      for (const auto& row : table.rows)
        if (dw::numeric_cell(row[static_cast<std::size_t>(idx)])) seen.insert(row[static_cast<std::size_t>(idx)]);
      if (seen.size() > 1) {
        x_col = c;
        break;
      }
    }
    if (x_col.empty()) throw UsageError("cannot infer the x column; pass --x");
  }
  const std::string group = table.column(o.group_col) >= 0 ? o.group_col : "";
  const auto series = dw::series_from_csv(table, x_col, o.y_col, group, filters);
  dw::PlotSpec spec;
  spec.title = o.plot;
  spec.x_label = x_col;
  spec.y_label = o.y_col;
  spec.log_x = o.log_x;
  spec.log_y = o.log_y;
  spec.lines = !o.scatter;
  const std::string svg = dw::render_svg(series, spec);
  const std::string path = o.out_dir + "/" + o.plot + ".svg";
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << svg;
  Table t{{"plot", "path", "series", "points"}, {}};
  std::size_t points = 0;
  for (const auto& s : series) points += s.points.size();
  t.add({o.plot, path, std::to_string(series.size()), std::to_string(points)});
  emit(t.str(), o.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discwalk: hitting, escape and entrance quantities of discs and annuli for lattice walks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file with [subcommand] sections");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the parsed configuration and exit")->configurable(false);

  Options o;
  std::function<int(const Options&)> action;

  const auto common = [&](CLI::App* c) {
    c->add_option("--law", o.law, "builtin law spec or law file path")->capture_default_str();
    c->add_option("--out", o.out, "also write the CSV to this file");
    c->add_option("--max-states", o.max_states, "solver state cap")->capture_default_str();
    c->add_option("--residual-tol", o.residual_tol, "relative residual bound")->capture_default_str();
  };
  const auto geometry = [&](CLI::App* c) {
    c->add_option("--K", o.K, "torus side; omit for the plane");
    c->add_option("--n", o.n, "disc radius");
    c->add_option("--s", o.s, "annulus width");
    c->add_option("--r", o.r, "inner radius");
    c->add_option("--R", o.R, "outer radius");
    c->add_option("--cap", o.cap, "planar cap radius N");
    c->add_option("--start", o.start, "start point(s) x1,x2");
  };
  const auto mc = [&](CLI::App* c) {
    c->add_option("--samples", o.samples, "number of trajectories")->capture_default_str();
    c->add_option("--seed", o.seed, "master seed")->capture_default_str();
    c->add_option("--workers", o.workers, "worker threads (output does not depend on it)")->capture_default_str();
    c->add_option("--step-cap", o.step_cap, "per-trajectory step cap")->capture_default_str();
    c->add_flag("--with-exact", o.with_exact, "add the exact value in the 'exact' column");
  };
  const auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, auto fn) {
    CLI::App* c = parent->add_subcommand(name, desc);
    c->configurable();
    common(c);
    c->callback([&action, fn] { action = fn; });
    return c;
  };

  auto* law = app.add_subcommand("law", "list, describe and validate step laws");
  law->require_subcommand(1);
  law->configurable();
  leaf(law, "list", "list builtin laws", cmd_law_list);
  leaf(law, "describe", "statistics of a law", cmd_law_describe)->add_option("--file", o.law_file, "law file");
  leaf(law, "validate", "validate a law (exit 2 when invalid)", cmd_law_describe)->add_option("--file", o.law_file, "law file");

  auto* solve = app.add_subcommand("solve", "exact computations on absorbing chains");
  solve->require_subcommand(1);
  solve->configurable();
  geometry(leaf(solve, "exit-time", "E^x T of leaving D(0,n)", cmd_solve_exit_time));
  auto* green = leaf(solve, "green", "G_D(0,n)(x,y)", cmd_solve_green);
  geometry(green);
  green->add_option("--target", o.target, "y point(s); default all of D(0,n)");
  geometry(leaf(solve, "hitprob", "P^x(enter D(0,r) before leaving D(0,R))", cmd_solve_hitprob));
  geometry(leaf(solve, "hitdist", "law of the exit point from D(0,n)", cmd_solve_hitdist));
  auto* pk = leaf(solve, "potential-kernel", "potential kernel a(x)", cmd_solve_potential_kernel);
  geometry(pk);
  pk->add_option("--t-max", o.t_max, "number of steps summed (rounded up to a power of two)")->capture_default_str();
  geometry(leaf(solve, "external-green", "toral Green's function of the disc complement on the diagonal",
                cmd_solve_external_green));
  geometry(leaf(solve, "entrance", "expected entrance time into D(0,n)", cmd_solve_entrance));
  geometry(leaf(solve, "annulus-stats", "jump-over probabilities psi and sigma", cmd_solve_annulus_stats));

  auto* mcs = app.add_subcommand("mc", "Monte Carlo estimates");
  mcs->require_subcommand(1);
  mcs->configurable();
  for (auto [name, desc, fn] : std::vector<std::tuple<std::string, std::string, int (*)(const Options&)>>{
           {"escape", "exit time of D(0,n)", cmd_mc_escape},
           {"entry", "entrance time into D(0,n)", cmd_mc_entry},
           {"gamblers", "probability of entering D(0,r) before leaving D(0,R)", cmd_mc_gamblers},
           {"local-time", "toral local time at 0 before leaving D(0,n)", cmd_mc_local_time},
           {"worst-case", "escape time of the worst-case walk", cmd_mc_worst_case}}) {
    auto* c = leaf(mcs, name, desc, fn);
    geometry(c);
    mc(c);
    if (name == "worst-case") c->add_option("--ystar", o.ystar, "relocation point")->capture_default_str();
  }

  auto* verify = leaf(&app, "verify", "run registered checks over a sweep grid", cmd_verify);
  verify->add_option("--check", o.checks, "check id (repeatable)");
  verify->add_flag("--all", o.all, "run every registered check");
  verify->add_option("--grid", o.grid, "grid file");
  verify->add_option("--summary", o.summary, "write a JSON summary here");
  verify->add_option("--workers", o.workers, "checks run concurrently")->capture_default_str();

  auto* list = leaf(&app, "checks", "list registered checks", [](const Options& opt) {
    Table t{{"check_id", "claim"}, {}};
    for (const auto& c : dw::registry()) t.add({c.id, c.claim});
    emit(t.str(), opt.out);
    return kOk;
  });
  (void)list;

  auto* report = leaf(&app, "report", "SVG plot of CSV columns", cmd_report);
  report->add_option("--from", o.from, "input CSV")->required();
  report->add_option("--plot", o.plot, "plot name (file stem)")->required();
  report->add_option("--x", o.x_col, "x column; default the first varying parameter column");
  report->add_option("--y", o.y_col, "y column")->capture_default_str();
  report->add_option("--group", o.group_col, "series column")->capture_default_str();
  report->add_option("--where", o.where, "row filter column=value (repeatable)");
  report->add_option("--out-dir", o.out_dir, "directory for the SVG")->capture_default_str();
  report->add_flag("--log-x", o.log_x, "log scale x");
  report->add_flag("--log-y", o.log_y, "log scale y");
  report->add_flag("--scatter", o.scatter, "points only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (print_config) {
    std::cout << app.config_to_str(false, false);
    return kOk;
  }
  try {
    return action(o);
  } catch (const dw::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
