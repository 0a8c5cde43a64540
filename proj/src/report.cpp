#include "landau/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace landau {

namespace {

using json = nlohmann::ordered_json;

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 72, kRight = 160, kTop = 40, kBottom = 52;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;  // in transformed units

  double map(double v) const { return log ? std::log10(v) : v; }
  bool shows(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  void fit(const std::vector<double>& vals) {
    double a = INFINITY, b = -INFINITY;
    for (double v : vals) {
      if (!shows(v)) continue;
      a = std::min(a, map(v));
      b = std::max(b, map(v));
    }
    if (!std::isfinite(a)) {
      a = 0.0;
      b = 1.0;
    }
    if (b - a < 1e-12) {
      const double pad = log ? 0.5 : std::max(std::abs(a) * 0.1, 0.5);
      a -= pad;
      b += pad;
    } else {
      const double pad = 0.05 * (b - a);
      a -= pad;
      b += pad;
    }
    lo = a;
    hi = b;
  }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double e = std::ceil(lo); e <= hi; e += 1.0) t.push_back(e);
      if (t.size() >= 2) return t;
      t.clear();
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
      t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }

  std::string label(double t) const {
    return log ? fmt("%g", std::pow(10.0, t)) : fmt("%g", t);
  }
};

}  // namespace

std::string render_svg(const Plot& plot) {
  Axis ax{plot.log_x}, ay{plot.log_y};
  std::vector<double> xs, ys;
  for (const Series& s : plot.series) {
    for (std::size_t k = 0; k < s.x.size(); ++k)
      if (ax.shows(s.x[k]) && ay.shows(s.y[k])) {
        xs.push_back(s.x[k]);
        ys.push_back(s.y[k]);
      }
  }
  ax.fit(xs);
  ay.fit(ys);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };
  auto tx = [&](double t) { return kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto ty = [&](double t) { return kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
       "viewBox=\"0 0 640 420\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) +
       "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(plot.title) +
       "</text>\n";
  s += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) +
       "\" width=\"" + fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const std::string x = fmt("%.2f", tx(t));
    s += "<line x1=\"" + x + "\" y1=\"" + fmt("%.2f", kTop + ph) + "\" x2=\"" + x +
         "\" y2=\"" + fmt("%.2f", kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + x + "\" y=\"" + fmt("%.2f", kTop + ph + 18) +
         "\" text-anchor=\"middle\">" + ax.label(t) + "</text>\n";
  }
  for (double t : ay.ticks()) {
    const std::string y = fmt("%.2f", ty(t));
    s += "<line x1=\"" + fmt("%.2f", kLeft - 5) + "\" y1=\"" + y + "\" x2=\"" +
         fmt("%.2f", kLeft) + "\" y2=\"" + y + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt("%.2f", kLeft - 8) + "\" y=\"" + y +
         "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + ay.label(t) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" +
       fmt("%.2f", kHeight - 12) + "\" text-anchor=\"middle\">" +
       escape(plot.x_label) + "</text>\n";
  s += "<text transform=\"translate(16," + fmt("%.2f", kTop + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(plot.y_label) +
       "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& ser = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!ax.shows(ser.x[i]) || !ay.shows(ser.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(ser.x[i])) + "," + fmt("%.2f", py(ser.y[i]));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\"" +
         (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts +
         "\"/>\n";
    if (ser.markers)
      for (std::size_t i = 0; i < ser.x.size(); ++i) {
        if (!ax.shows(ser.x[i]) || !ay.shows(ser.y[i])) continue;
        s += "<circle cx=\"" + fmt("%.2f", px(ser.x[i])) + "\" cy=\"" +
             fmt("%.2f", py(ser.y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    const double ly = kTop + 10 + 16 * static_cast<double>(k);
    const double lx = kWidth - kRight + 12;
    s += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", ly) +
         "\" x2=\"" + fmt("%.2f", lx + 20) + "\" y2=\"" + fmt("%.2f", ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
         (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    s += "<text x=\"" + fmt("%.2f", lx + 26) + "\" y=\"" + fmt("%.2f", ly) +
         "\" dominant-baseline=\"middle\">" + escape(ser.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

namespace {

const std::set<std::string> kPlottable = {"stats", "diagnostics", "lln_rate",
                                          "chaos", "moments"};

Series column_series(const CsvTable& t, const std::string& x, const std::string& y) {
  return Series{y, t.values(x), t.values(y)};
}

json fit_entry(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

/// Data series with markers plus a dashed fitted line when a fit exists.
void add_rate_series(Plot& plot, json& slopes, const std::string& name,
                     const std::vector<double>& n, const std::vector<double>& v) {
  plot.series.push_back(Series{name, n, v, false, true});
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < n.size(); ++k)
    if (v[k] > 0.0) pts.emplace_back(n[k], v[k]);
  try {
    const RateFit fit = convergence_slope(pts);
    const double a = pts.front().first, b = pts.back().first;
    plot.series.push_back(
        Series{name + " fit " + fmt("%.3f", fit.slope), {a, b},
               {std::exp(fit.intercept) * std::pow(a, fit.slope),
                std::exp(fit.intercept) * std::pow(b, fit.slope)},
               true});
    slopes[name] = fit_entry(fit);
  } catch (const std::invalid_argument& e) {
    slopes[name] = {{"error", e.what()}};
  }
}

json report_table(const CsvTable& t, const std::string& stem, Plot& plot) {
  json entry;
  entry["kind"] = t.kind;
  if (t.kind == "stats") {
    plot = {stem, "t", "value", false, false, {}};
    plot.series.push_back(column_series(t, "time", "M2"));
    for (const auto& c : t.columns)
      if (c.rfind("Psi_", 0) == 0) plot.series.push_back(column_series(t, "time", c));
    json last;
    for (const auto& c : t.columns) last[c] = t.rows.back()[t.column(c)];
    entry["final"] = last;
  } else if (t.kind == "diagnostics") {
    plot = {stem, "t", "directional temperature", false, false, {}};
    for (const char* c : {"E11_grid", "E22_grid"}) plot.series.push_back(column_series(t, "time", c));
    for (const char* c : {"E11_closed", "E22_closed"}) {
      Series s = column_series(t, "time", c);
      s.dashed = true;
      plot.series.push_back(s);
    }
    const auto mass = t.values("mass");
    double drift = 0.0, dev = 0.0;
    for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()));
    for (double v : t.values("max_diag_deviation")) dev = std::max(dev, v);
    entry["max_mass_drift"] = drift;
    entry["max_diag_deviation"] = dev;
  } else if (t.kind == "lln_rate") {
    plot = {stem, "N", "lln functional", true, true, {}};
    const auto n = t.values("N"), time = t.values("time"), mean = t.values("mean");
    std::vector<double> times = time;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    json slopes;
    for (double tt : times) {
      std::vector<double> xs, ys;
      for (std::size_t k = 0; k < n.size(); ++k)
        if (time[k] == tt) {
          xs.push_back(n[k]);
          ys.push_back(mean[k]);
        }
      add_rate_series(plot, slopes, "t=" + fmt("%g", tt), xs, ys);
    }
    entry["slopes"] = slopes;
  } else if (t.kind == "chaos") {
    plot = {stem, "N", "distance", true, true, {}};
    json slopes;
    const auto n = t.values("N");
    add_rate_series(plot, slopes, "sliced_w2", n, t.values("sliced_w2"));
    add_rate_series(plot, slopes, "knn_kl", n, t.values("knn_kl"));
    entry["slopes"] = slopes;
    double worst = INFINITY;
    const auto margin = t.values("ckp_margin"), sigma = t.values("ckp_sigma");
    for (std::size_t k = 0; k < margin.size(); ++k)
      worst = std::min(worst, sigma[k] > 0.0 ? margin[k] / sigma[k] : margin[k]);
    entry["min_ckp_margin_over_sigma"] = worst;
  } else {
    plot = {stem, "t", "moment", false, false, {}};
    const auto rep = t.values("replica"), time = t.values("time");
    const auto mp = t.values("mp"), bound = t.values("bound"), margin = t.values("margin");
    Series a{"mp (replica 0)", {}, {}}, b{"bound (replica 0)", {}, {}, true};
    double worst = INFINITY;
    for (std::size_t k = 0; k < rep.size(); ++k) {
      worst = std::min(worst, margin[k]);
      if (rep[k] != 0.0) continue;
      a.x.push_back(time[k]);
      a.y.push_back(mp[k]);
      b.x.push_back(time[k]);
      b.y.push_back(bound[k]);
    }
    plot.series = {a, b};
    entry["min_margin"] = worst;
  }
  return entry;
}

}  // namespace

int cmd_report(const std::vector<std::filesystem::path>& inputs,
               const RunContext& ctx) {
  if (inputs.empty()) throw ConfigError("report: no input tables given");
  std::vector<std::filesystem::path> files;
  for (const auto& in : inputs) {
    if (std::filesystem::is_directory(in)) {
      std::vector<std::filesystem::path> found;
      for (const auto& e : std::filesystem::directory_iterator(in))
        if (e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) {
        std::string kind;
        try {
          kind = peek_kind(f);
        } catch (const SchemaError&) {
          continue;
        }
        if (kPlottable.count(kind)) files.push_back(f);
      }
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw SchemaError("report: no plottable tables found");

  std::filesystem::create_directories(ctx.out_dir);
  json summary;
  summary["tool_version"] = kToolVersion;
  json entries = json::array();
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    if (!kPlottable.count(t.kind))
      throw SchemaError(f.string() + ": no plot for " + t.kind + " tables");
    if (t.rows.empty()) throw SchemaError(f.string() + ": table has no rows");
    Plot plot;
    const std::string stem = f.stem().string();
    json entry = report_table(t, stem, plot);
    const auto svg = ctx.out_dir / (stem + ".svg");
    std::ofstream out(svg);
    if (!out) throw std::runtime_error("cannot write " + svg.string());
    out << render_svg(plot);
    entry["input"] = f.filename().string();
    entry["plot"] = svg.filename().string();
    entries.push_back(entry);
  }
  summary["tables"] = entries;
  std::ofstream out(ctx.out_dir / "summary.json");
  out << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace landau
