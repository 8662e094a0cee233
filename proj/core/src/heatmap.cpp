#include "hetmg/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "hetmg/error.hpp"

namespace hetmg {
namespace {

struct Rgb {
  int r, g, b;
};

// Dark indigo to yellow; every channel is monotone in t.
constexpr Rgb kLow{44, 26, 91};
constexpr Rgb kHigh{249, 231, 33};

std::string colour(double t) {
  auto lerp = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", lerp(kLow.r, kHigh.r), lerp(kLow.g, kHigh.g),
                lerp(kLow.b, kHigh.b));
  return buf;
}

}  // namespace

std::string render_heatmap(const Table& table, const std::string& column) {
  if (table.rows.empty()) throw Error(Errc::EmptyTable, "no rows to render");
  const std::size_t col = table.column_index(column);
  const std::size_t lcol = table.column_index("lambda1");
  const std::size_t icol = table.column_index("impact1");
  const auto flag_it = std::find(table.columns.begin(), table.columns.end(), "nonergodic");
  const bool has_flag = flag_it != table.columns.end();
  const std::size_t fcol = static_cast<std::size_t>(flag_it - table.columns.begin());

  std::map<double, std::size_t> xs, ys;
  for (const auto& r : table.rows) {
    xs.emplace(r[lcol], 0);
    ys.emplace(r[icol], 0);
  }
  if (xs.size() * ys.size() != table.rows.size())
    throw Error(Errc::NonRectangularGrid, "rows do not form a full lambda1 x impact1 grid");
  std::size_t k = 0;
  for (auto& [v, idx] : xs) idx = k++;
  k = 0;
  for (auto& [v, idx] : ys) idx = k++;
  std::vector<int> seen(xs.size() * ys.size(), 0);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : table.rows) {
    if (++seen[xs[r[lcol]] * ys.size() + ys[r[icol]]] > 1)
      throw Error(Errc::NonRectangularGrid, "duplicate grid point");
    if (std::isfinite(r[col])) {
      lo = std::min(lo, r[col]);
      hi = std::max(hi, r[col]);
    }
  }

  const double cell = std::clamp(600.0 / static_cast<double>(std::max(xs.size(), ys.size())), 2.0, 60.0);
  const double left = 70, top = 40;
  const double width = cell * static_cast<double>(xs.size());
  const double height = cell * static_cast<double>(ys.size());
  const double bar_x = left + width + 30;
  const double total_w = bar_x + 90, total_h = top + height + 60;

  std::ostringstream svg;
  svg.precision(10);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\"" << total_h
      << "\" viewBox=\"0 0 " << total_w << ' ' << total_h << "\">\n";
  svg << "<title>" << column << "</title>\n";
  svg << "<defs><pattern id=\"hatch\" width=\"4\" height=\"4\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\"><rect width=\"4\" height=\"4\" fill=\"#ffffff\"/>"
         "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"4\" stroke=\"#888888\" stroke-width=\"1.5\"/></pattern></defs>\n";
  svg << "<text x=\"" << left + width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << column
      << "</text>\n";
  for (const auto& r : table.rows) {
    const double x = left + cell * static_cast<double>(xs[r[lcol]]);
    const double y = top + height - cell * static_cast<double>(ys[r[icol]] + 1);
    const bool hatched = (has_flag && r[fcol] != 0.0) || !std::isfinite(r[col]);
    std::string fill = "url(#hatch)";
    if (!hatched) fill = colour(hi > lo ? (r[col] - lo) / (hi - lo) : 0.5);
    svg << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"" << fill << "\"/>\n";
  }
  svg << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 40
      << "\" text-anchor=\"middle\" font-size=\"14\">λ₁</text>\n";
  svg << "<text x=\"" << left - 45 << "\" y=\"" << top + height / 2 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << "I₁</text>\n";
  svg << "<text x=\"" << left << "\" y=\"" << top + height + 18 << "\" font-size=\"11\">" << xs.begin()->first
      << "</text>\n";
  svg << "<text x=\"" << left + width << "\" y=\"" << top + height + 18 << "\" text-anchor=\"end\" font-size=\"11\">"
      << xs.rbegin()->first << "</text>\n";
  svg << "<text x=\"" << left - 6 << "\" y=\"" << top + height << "\" text-anchor=\"end\" font-size=\"11\">"
      << ys.begin()->first << "</text>\n";
  svg << "<text x=\"" << left - 6 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\" font-size=\"11\">"
      << ys.rbegin()->first << "</text>\n";

  constexpr int kBarSteps = 50;
  const double step_h = height / kBarSteps;
  for (int s = 0; s < kBarSteps; ++s) {
    const double t = (s + 0.5) / kBarSteps;
    svg << "<rect class=\"bar\" x=\"" << bar_x << "\" y=\"" << top + height - step_h * (s + 1) << "\" width=\"20\" height=\""
        << step_h << "\" fill=\"" << colour(t) << "\"/>\n";
  }
  if (std::isfinite(lo)) {
    svg << "<text x=\"" << bar_x + 26 << "\" y=\"" << top + height << "\" font-size=\"11\">" << format_number(lo)
        << "</text>\n";
    svg << "<text x=\"" << bar_x + 26 << "\" y=\"" << top + 10 << "\" font-size=\"11\">" << format_number(hi)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hetmg
