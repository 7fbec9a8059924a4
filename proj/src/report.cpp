#include "memphase/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "memphase/errors.hpp"
#include "memphase/io.hpp"

namespace memphase::report {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string escape_xml(const std::string& s) {
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

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  bool log = true;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo - 1e-12); e <= hi + 1e-12; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) {
        out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      }
    } else {
      for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
    }
    return out;
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double v : values) {
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (hi - lo < 1e-12) {
    const double pad = log ? 0.5 : std::max(1.0, std::abs(lo)) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "epsilon,h,M,I,J,F,discrepancy,M_err,I_err,J_err,F_err\n";
  for (const auto& r : result.rows) {
    const EnergyReport& e = r.energies;
    out << format_double(r.epsilon) << ',' << format_double(r.h) << ',' << format_double(e.M) << ','
        << format_double(e.I) << ',' << format_double(e.J) << ',' << format_double(e.F) << ','
        << format_double(e.discrepancy_l1) << ',' << cell(r.errors.M) << ',' << cell(r.errors.I) << ','
        << cell(r.errors.J) << ',' << cell(r.errors.F) << '\n';
  }
  return out.str();
}

nlohmann::json sweep_json(const SweepResult& result) {
  nlohmann::json j;
  j["complete"] = result.complete;
  if (!result.complete) j["failure"] = result.failure;
  j["sharp_limits"] = {{"perimeter", result.limits.perimeter},
                       {"line", optional_json(result.limits.line)},
                       {"willmore", optional_json(result.limits.willmore)}};
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row = to_json(r.energies);
    row["h"] = r.h;
    row["equidistribution"] = r.equidistribution;
    row["errors"] = {{"M", optional_json(r.errors.M)},
                     {"I", optional_json(r.errors.I)},
                     {"J", optional_json(r.errors.J)},
                     {"F", optional_json(r.errors.F)}};
    rows.push_back(row);
  }
  j["rates"] = nlohmann::json::object();
  for (const auto& [name, rate] : result.rates) j["rates"][name] = rate;
  return j;
}

std::string flow_csv(const FlowLog& log) {
  std::ostringstream out;
  out << "step,time,M,I,E_total,mass_u,max_abs_v,layer_fraction\n";
  for (const auto& r : log.rows) {
    out << r.step << ',' << format_double(r.time) << ',' << format_double(r.M) << ',' << format_double(r.I)
        << ',' << format_double(r.E_total) << ',' << format_double(r.mass_u) << ','
        << format_double(r.max_abs_v) << ',' << format_double(r.layer_fraction) << '\n';
  }
  return out.str();
}

nlohmann::json flow_json(const FlowLog& log) {
  nlohmann::json j;
  j["backtracks"] = log.backtracks;
  j["worst_relative_increase"] = log.worst_increase;
  if (log.gradient_check) {
    j["gradient_check"] = {{"variation_M", log.gradient_check->variation_M},
                           {"variation_I_u", log.gradient_check->variation_I_u},
                           {"variation_I_v", log.gradient_check->variation_I_v}};
  }
  if (!log.rows.empty()) {
    const FlowLogRow& r = log.rows.back();
    j["final"] = {{"step", r.step},   {"time", r.time},         {"M", r.M},
                  {"I", r.I},         {"E_total", r.E_total},   {"mass_u", r.mass_u},
                  {"max_abs_v", r.max_abs_v}, {"layer_fraction", r.layer_fraction}};
  }
  return j;
}

std::vector<Series> sweep_error_series(const SweepResult& result) {
  std::vector<Series> out;
  const std::array<std::pair<const char*, std::optional<double> RelativeErrors::*>, 4> fields{
      {{"M", &RelativeErrors::M}, {"I", &RelativeErrors::I}, {"J", &RelativeErrors::J}, {"F", &RelativeErrors::F}}};
  for (const auto& [name, member] : fields) {
    Series s;
    s.name = name;
    for (const auto& r : result.rows) {
      const auto& e = r.errors.*member;
      if (!e) break;
      s.x.push_back(r.epsilon);
      s.y.push_back(std::abs(*e));
    }
    if (s.x.size() == result.rows.size() && s.x.size() >= 2) out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series) {
  if (series.empty()) throw ConfigError("svg: no series to plot");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : series) {
    if (s.x.size() < 2 || s.x.size() != s.y.size()) {
      throw ConfigError("svg: series '" + s.name + "' needs at least two (x, y) points");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        throw ConfigError("svg: series '" + s.name + "' has a non-finite value");
      }
    }
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const bool positive = std::all_of(xs.begin(), xs.end(), [](double v) { return v > 0.0; }) &&
                        std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
  const Axis ax = make_axis(xs, positive);
  const Axis ay = make_axis(ys, positive);

  constexpr double width = 640.0;
  constexpr double height = 440.0;
  constexpr double left = 80.0;
  constexpr double right = 140.0;
  constexpr double top = 40.0;
  constexpr double bottom = 60.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double x) { return left + ax.map(x) * pw; };
  auto py = [&](double y) { return top + (1.0 - ay.map(y)) * ph; };
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = px(t);
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(x) << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed(x) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(y) << "\" x2=\"" << left << "\" y2=\"" << fixed(y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">&#949;</text>\n";
  svg << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << top + ph / 2 << ")\">relative error</text>\n";
  if (!positive) {
    svg << "<text x=\"" << left + 6 << "\" y=\"" << top - 12
        << "\" fill=\"#b00000\">warning: non-positive values, linear axes used</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) svg << (i ? " " : "") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg << "<circle cx=\"" << fixed(px(s.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    const double ly = top + 20.0 + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg(const std::vector<Series>& series, const std::filesystem::path& path) {
  io::write_file_atomic(path, render_svg(series));
}

}  // namespace memphase::report
