#include "aimdsync/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace aimdsync {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct LinePlot {
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  int width = 860, height = 520;
  int ml = 70, mr = 20, mt = 40, mb = 50;
  std::string body;

  void fit(double x, double y, bool first) {
    if (first) {
      x_lo = x_hi = x;
      y_lo = y_hi = y;
    } else {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }

  void pad_ranges() {
    if (x_hi - x_lo < 1e-12) {
      x_lo -= 0.5;
      x_hi += 0.5;
    }
    if (y_hi - y_lo < 1e-12) {
      y_lo -= 0.5;
      y_hi += 0.5;
    } else {
      const double pad = 0.05 * (y_hi - y_lo);
      y_lo -= pad;
      y_hi += pad;
    }
  }

  double px(double x) const { return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr); }
  double py(double y) const {
    return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double stroke = 1.5) {
    if (pts.empty()) return;
    body += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
            fmt(stroke) + "\" points=\"";
    for (const auto& [x, y] : pts) body += fmt(px(x)) + "," + fmt(py(y)) + " ";
    body += "\"/>\n";
  }

  void band(const std::vector<std::pair<double, double>>& upper,
            const std::vector<std::pair<double, double>>& lower, const std::string& color) {
    if (upper.empty()) return;
    body += "<polygon fill=\"" + color + "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : upper) body += fmt(px(x)) + "," + fmt(py(y)) + " ";
    for (auto it = lower.rbegin(); it != lower.rend(); ++it)
      body += fmt(px(it->first)) + "," + fmt(py(it->second)) + " ";
    body += "\"/>\n";
  }

  void label(double x, double y, const std::string& text, const std::string& color) {
    body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"12\" fill=\"" +
            color + "\">" + text + "</text>\n";
  }

  std::string render(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) const {
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) +
                      "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                      std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // frame
    svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" +
           fmt(width - ml - mr) + "\" height=\"" + fmt(height - mt - mb) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";
    // ticks
    for (int i = 0; i <= 5; ++i) {
      const double fx = x_lo + (x_hi - x_lo) * i / 5.0;
      const double fy = y_lo + (y_hi - y_lo) * i / 5.0;
      svg += "<line x1=\"" + fmt(px(fx)) + "\" y1=\"" + fmt(height - mb) + "\" x2=\"" +
             fmt(px(fx)) + "\" y2=\"" + fmt(height - mb + 5) + "\" stroke=\"#444\"/>\n";
      svg += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(height - mb + 18) +
             "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(fx) + "</text>\n";
      svg += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(py(fy)) + "\" x2=\"" + fmt(ml) +
             "\" y2=\"" + fmt(py(fy)) + "\" stroke=\"#444\"/>\n";
      svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(py(fy) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\">" + fmt(fy) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(width / 2.0) + "\" y=\"22\" font-size=\"14\" "
           "text-anchor=\"middle\">" + title + "</text>\n";
    svg += "<text x=\"" + fmt(width / 2.0) + "\" y=\"" + fmt(height - 12) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt(height / 2.0) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt(height / 2.0) + ")\">" + ylabel + "</text>\n";
    svg += body;
    svg += "</svg>\n";
    return svg;
  }
};

}  // namespace

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

void write_trajectory_csv(const std::string& path, const RunResult& run, int n) {
  auto out = open_out(path);
  out << "resource,event,window,psi,dt,pattern";
  for (int i = 0; i < n; ++i) out << ",share_" << i;
  out << "\n";
  for (const auto& meta : run.metas)
    for (Resource c : {Resource::a, Resource::b})
      for (const auto& ev : meta.events[static_cast<int>(c)]) {
        out << resource_name(c) << ',' << ev.index << ',' << ev.window << ','
            << format_g17(ev.psi) << ',' << format_g17(ev.dt) << ',' << ev.pattern.bits();
        for (double v : ev.post_shares) out << ',' << format_g17(v);
        out << '\n';
      }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_zeta_csv(const std::string& path, const std::vector<MetaEventRecord>& metas) {
  auto out = open_out(path);
  out << "l,tau,psi";
  if (!metas.empty()) {
    const auto& z = metas.front().zeta_next;
    for (Resource c : {Resource::a, Resource::b})
      for (int j = 1; j <= z.window; ++j)
        for (int i = 0; i < z.n; ++i)
          out << ",z" << resource_name(c) << "_b" << j << "_a" << i;
  }
  out << "\n";
  for (const auto& meta : metas) {
    out << meta.index << ',' << format_g17(meta.tau) << ',' << format_g17(meta.psi_a);
    for (double v : meta.zeta_next.flat()) out << ',' << format_g17(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_moments_csv(const std::string& path, const MomentSeries& series) {
  auto out = open_out(path);
  out << "resource,event,agent,mean,variance\n";
  for (Resource c : {Resource::a, Resource::b})
    for (long e = 0; e < series.events; ++e)
      for (int i = 0; i < series.n; ++i)
        out << resource_name(c) << ',' << e << ',' << i << ','
            << format_g17(series.mean[series.at(c, e, i)]) << ','
            << format_g17(series.variance[series.at(c, e, i)]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_replicas_csv(const std::string& path, const std::vector<ReplicaSummary>& reps) {
  auto out = open_out(path);
  out << "replica,seed,resource,agent,long_term_mean\n";
  for (size_t r = 0; r < reps.size(); ++r)
    for (Resource c : {Resource::a, Resource::b}) {
      const Vec& mean = reps[r].long_term_mean[static_cast<int>(c)];
      for (size_t i = 0; i < mean.size(); ++i)
        out << r << ',' << reps[r].seed << ',' << resource_name(c) << ',' << i << ','
            << format_g17(mean[i]) << '\n';
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_utilization_svg(const std::string& path, const RunResult& run,
                           const ResourceParams& params_a, const ResourceParams& params_b,
                           long max_windows) {
  if (run.metas.empty()) throw std::invalid_argument("write_utilization_svg: empty run");
  LinePlot plot;
  bool first = true;

  std::array<std::vector<std::pair<double, double>>, 2> lines;
  for (Resource c : {Resource::a, Resource::b}) {
    const ResourceParams& params = (c == Resource::a) ? params_a : params_b;
    Vec x = run.initial_shares[static_cast<int>(c)];
    auto& pts = lines[static_cast<int>(c)];
    for (const auto& meta : run.metas) {
      if (meta.index >= max_windows) break;
      for (const auto& ev : meta.events[static_cast<int>(c)]) {
        double kept = 0.0;
        for (int i = 0; i < params.size(); ++i) {
          const double beta = ev.pattern[i] ? params.agents[static_cast<size_t>(i)].beta : 1.0;
          kept += beta * x[static_cast<size_t>(i)];
        }
        pts.emplace_back(ev.psi, 1.0);
        pts.emplace_back(ev.psi, kept);
        pts.emplace_back(ev.psi + ev.dt, 1.0);
        x = ev.post_shares;
      }
      // frozen plateau until the synchronized clock
      pts.emplace_back(meta.psi_a, 1.0);
    }
    for (const auto& [px, py] : pts) {
      plot.fit(px, py, first);
      first = false;
    }
  }
  plot.pad_ranges();
  plot.polyline(lines[0], kPalette[0]);
  plot.polyline(lines[1], kPalette[1]);
  plot.label(plot.ml + 10, plot.mt + 16, "resource a", kPalette[0]);
  plot.label(plot.ml + 10, plot.mt + 32, "resource b", kPalette[1]);

  auto out = open_out(path);
  out << plot.render("Resource utilization between capacity events", "model time",
                     "utilization / capacity");
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_moments_svg(const std::string& path, const MomentSeries& series, Resource c) {
  if (series.events <= 0 || series.n <= 0)
    throw std::invalid_argument("write_moments_svg: empty series");
  LinePlot plot;
  bool first = true;

  std::vector<std::vector<std::pair<double, double>>> means(static_cast<size_t>(series.n));
  std::vector<std::vector<std::pair<double, double>>> upper(static_cast<size_t>(series.n));
  std::vector<std::vector<std::pair<double, double>>> lower(static_cast<size_t>(series.n));
  for (int i = 0; i < series.n; ++i)
    for (long e = 0; e < series.events; ++e) {
      const double m = series.mean[series.at(c, e, i)];
      const double sd = std::sqrt(series.variance[series.at(c, e, i)]);
      means[static_cast<size_t>(i)].emplace_back(double(e), m);
      upper[static_cast<size_t>(i)].emplace_back(double(e), m + sd);
      lower[static_cast<size_t>(i)].emplace_back(double(e), m - sd);
      plot.fit(double(e), m + sd, first);
      first = false;
      plot.fit(double(e), m - sd, false);
    }
  plot.pad_ranges();
  for (int i = 0; i < series.n; ++i) {
    const char* color = kPalette[static_cast<size_t>(i) % 8];
    plot.band(upper[static_cast<size_t>(i)], lower[static_cast<size_t>(i)], color);
    plot.polyline(means[static_cast<size_t>(i)], color);
    plot.label(plot.ml + 10, plot.mt + 16 + 16 * i, "agent " + std::to_string(i), color);
  }

  auto out = open_out(path);
  out << plot.render(std::string("Ensemble mean and spread, resource ") + resource_name(c),
                     "capacity event", "allocation");
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace aimdsync
