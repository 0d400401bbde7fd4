#pragma once

// CSV reading and SVG line/scatter plots of sweep columns.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace discwalk {

class ReportError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ReportError("CSV has no column '" + name + "'");
    return c;
  }
};

/// Splits one CSV record; quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ReportError("unterminated quoted CSV field");
  out.push_back(cur);
  return out;
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = parse_csv_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    fields.resize(t.header.size());
    t.rows.push_back(std::move(fields));
  }
  if (first) throw ReportError("empty CSV input");
  return t;
}

/// Parses a numeric cell; empty or non-numeric cells give nullopt.
inline std::optional<double> numeric_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool lines = true;  // false: scatter only
  int width = 640;
  int height = 420;
};

/// Groups rows into series by `group_col` (empty: one series), keeping rows
/// whose `filters` columns equal the given values and whose x, y parse.
inline std::vector<PlotSeries> series_from_csv(const CsvTable& t, const std::string& x_col, const std::string& y_col,
                                               const std::string& group_col,
                                               const std::vector<std::pair<std::string, std::string>>& filters = {}) {
  const int xc = t.require_column(x_col), yc = t.require_column(y_col);
  const int gc = group_col.empty() ? -1 : t.require_column(group_col);
  std::vector<std::pair<int, std::string>> fc;
  for (const auto& [k, v] : filters) fc.emplace_back(t.require_column(k), v);
  std::vector<PlotSeries> out;
  std::map<std::string, std::size_t> index;
  for (const auto& row : t.rows) {
    bool keep = true;
    for (const auto& [c, v] : fc) keep &= row[static_cast<std::size_t>(c)] == v;
    if (!keep) continue;
    const auto x = numeric_cell(row[static_cast<std::size_t>(xc)]);
    const auto y = numeric_cell(row[static_cast<std::size_t>(yc)]);
    if (!x || !y) continue;
    const std::string label = gc < 0 ? y_col : row[static_cast<std::size_t>(gc)];
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(label, out.size()).first;
      out.push_back({label, {}});
    }
    out[it->second].points.emplace_back(*x, *y);
  }
  for (auto& s : out) std::stable_sort(s.points.begin(), s.points.end());
  return out;
}

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v, const char* f = "%.2f") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0 : v);
  return t;
}

}  // namespace detail

inline std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  const auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  std::size_t usable = 0;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if ((spec.log_x && !(x > 0)) || (spec.log_y && !(y > 0))) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
      ++usable;
    }
  if (usable == 0) throw ReportError("nothing to plot: no numeric points in the selected columns");
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad_y = 0.05 * (y1 - y0);
  y0 -= pad_y;
  y1 += pad_y;

  const double L = 80, R = 170, T = 40, B = 55;
  const double W = spec.width - L - R, H = spec.height - T - B;
  const auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * W; };
  const auto py = [&](double v) { return T + (1 - (v - y0) / (y1 - y0)) * H; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::svg_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : detail::nice_ticks(x0, x1)) {
    const double p = px(v);
    os << "<line x1=\"" << detail::fmt(p) << "\" y1=\"" << T + H << "\" x2=\"" << detail::fmt(p) << "\" y2=\""
       << T + H + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << detail::fmt(p) << "\" y=\"" << T + H + 18 << "\" text-anchor=\"middle\">"
       << (spec.log_x ? "1e" + detail::fmt(v, "%g") : detail::fmt(v, "%g")) << "</text>\n";
  }
  for (double v : detail::nice_ticks(y0, y1)) {
    const double p = py(v);
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << detail::fmt(p) << "\" x2=\"" << L << "\" y2=\"" << detail::fmt(p)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << detail::fmt(p + 4) << "\" text-anchor=\"end\">"
       << (spec.log_y ? "1e" + detail::fmt(v, "%g") : detail::fmt(v, "%g")) << "</text>\n";
  }
  os << "<text x=\"" << L + W / 2 << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
     << detail::svg_escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << T + H / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::svg_escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % (sizeof palette / sizeof *palette)];
    std::string path;
    for (auto [x, y] : series[k].points) {
      if ((spec.log_x && !(x > 0)) || (spec.log_y && !(y > 0))) continue;
      const double a = px(tx(x)), b = py(ty(y));
      path += (path.empty() ? "M" : " L") + detail::fmt(a) + "," + detail::fmt(b);
      os << "<circle cx=\"" << detail::fmt(a) << "\" cy=\"" << detail::fmt(b) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    if (spec.lines && !path.empty())
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    os << "<rect x=\"" << L + W + 12 << "\" y=\"" << detail::fmt(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
       << color << "\"/>\n";
    os << "<text x=\"" << L + W + 28 << "\" y=\"" << detail::fmt(ly + 1) << "\">" << detail::svg_escape(series[k].label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace discwalk
