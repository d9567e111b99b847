#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tsforge/engine.hpp"
#include "tsforge/errors.hpp"
#include "tsforge/io.hpp"

namespace tsforge {

namespace detail {

inline constexpr int kPlotWidth = 960;
inline constexpr int kPanelHeight = 110;
inline constexpr int kPanelGap = 14;
inline constexpr int kMarginLeft = 46;
inline constexpr int kMarginRight = 12;
inline constexpr int kMarginTop = 16;
inline constexpr std::int64_t kMaxPlotPoints = 4000;

inline void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  out += buf;
}

struct PanelScale {
  double lo = 0.0;
  double hi = 1.0;
  double x0 = 0.0;
  double x_per_t = 1.0;
  double y_top = 0.0;
  double y_height = 1.0;

  double x(double t) const { return x0 + t * x_per_t; }
  double y(double v) const {
    const double f = (v - lo) / (hi - lo);
    return y_top + (1.0 - f) * y_height;
  }
};

// Polyline through the delivered values of one variable. Long series are
// reduced to a per-bucket min/max envelope so the file stays small without
// hiding spikes.
inline void append_series_path(std::string& out, const GenerationResult& r,
                               int var, const PanelScale& s) {
  const std::int64_t train = r.train.rows;
  const std::int64_t total = train + r.test.rows;
  const auto value = [&](std::int64_t t) {
    return t < train ? r.train.at(t, var) : r.test.at(t - train, var);
  };

  out += "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1\" "
         "points=\"";
  if (total <= kMaxPlotPoints) {
    for (std::int64_t t = 0; t < total; ++t) {
      append_num(out, s.x(static_cast<double>(t)));
      out.push_back(',');
      append_num(out, s.y(value(t)));
      out.push_back(' ');
    }
  } else {
    const std::int64_t buckets = kMaxPlotPoints / 2;
    for (std::int64_t b = 0; b < buckets; ++b) {
      const std::int64_t from = b * total / buckets;
      const std::int64_t to =
          std::max(from + 1, (b + 1) * total / buckets);
      double lo = value(from);
      double hi = lo;
      for (std::int64_t t = from + 1; t < to; ++t) {
        lo = std::min(lo, value(t));
        hi = std::max(hi, value(t));
      }
      const double mid =
          s.x(static_cast<double>(from + to - 1) / 2.0);
      append_num(out, mid);
      out.push_back(',');
      append_num(out, s.y(hi));
      out.push_back(' ');
      append_num(out, mid);
      out.push_back(',');
      append_num(out, s.y(lo));
      out.push_back(' ');
    }
  }
  out += "\"/>\n";
}

}  // namespace detail

// Renders the delivered series as a stacked-panel SVG: one panel per
// requested variable, anomaly windows shaded on the affected panel, and a
// dashed line at the train/test boundary. An empty variable list selects
// every variable.
inline void emit_plot(const GenerationResult& result,
                      std::vector<int> variables,
                      const std::filesystem::path& out_path) {
  const int d = result.train.d;
  if (variables.empty()) {
    for (int v = 0; v < d; ++v) variables.push_back(v);
  }
  for (int v : variables) {
    if (v < 0 || v >= d) {
      throw ConfigError("plot variable",
                        "x" + std::to_string(v) + " is out of range");
    }
  }

  const std::int64_t train = result.train.rows;
  const std::int64_t total = train + result.test.rows;
  const int panels = static_cast<int>(variables.size());
  const int height = detail::kMarginTop +
                     panels * (detail::kPanelHeight + detail::kPanelGap);
  const double plot_w = detail::kPlotWidth - detail::kMarginLeft -
                        detail::kMarginRight;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(detail::kPlotWidth) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(detail::kPlotWidth) + " " + std::to_string(height) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < panels; ++p) {
    const int v = variables[static_cast<std::size_t>(p)];
    detail::PanelScale s;
    s.x0 = detail::kMarginLeft;
    s.x_per_t = total > 1 ? plot_w / static_cast<double>(total - 1) : 0.0;
    s.y_top = detail::kMarginTop +
              p * (detail::kPanelHeight + detail::kPanelGap);
    s.y_height = detail::kPanelHeight;

    double lo = result.train.at(0, v);
    double hi = lo;
    for (std::int64_t t = 0; t < train; ++t) {
      lo = std::min(lo, result.train.at(t, v));
      hi = std::max(hi, result.train.at(t, v));
    }
    for (std::int64_t t = 0; t < result.test.rows; ++t) {
      lo = std::min(lo, result.test.at(t, v));
      hi = std::max(hi, result.test.at(t, v));
    }
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = (hi - lo) * 0.06;
    s.lo = lo - pad;
    s.hi = hi + pad;

    svg += "<rect x=\"";
    detail::append_num(svg, s.x0);
    svg += "\" y=\"";
    detail::append_num(svg, s.y_top);
    svg += "\" width=\"";
    detail::append_num(svg, plot_w);
    svg += "\" height=\"";
    detail::append_num(svg, s.y_height);
    svg += "\" fill=\"none\" stroke=\"#cccccc\"/>\n";

    for (const AnomalySpec& a : result.system.anomalies) {
      if (a.var != v) continue;
      const double x0 = s.x(static_cast<double>(a.t_start));
      const double x1 = s.x(static_cast<double>(a.t_end - 1));
      svg += "<rect class=\"anomaly\" x=\"";
      detail::append_num(svg, x0);
      svg += "\" y=\"";
      detail::append_num(svg, s.y_top);
      svg += "\" width=\"";
      detail::append_num(svg, std::max(x1 - x0, 1.0));
      svg += "\" height=\"";
      detail::append_num(svg, s.y_height);
      svg += "\" fill=\"#d62728\" fill-opacity=\"0.18\"/>\n";
    }

    if (result.test.rows > 0) {
      const double xb = s.x(static_cast<double>(train));
      svg += "<line x1=\"";
      detail::append_num(svg, xb);
      svg += "\" x2=\"";
      detail::append_num(svg, xb);
      svg += "\" y1=\"";
      detail::append_num(svg, s.y_top);
      svg += "\" y2=\"";
      detail::append_num(svg, s.y_top + s.y_height);
      svg += "\" stroke=\"#777777\" stroke-dasharray=\"4 3\"/>\n";
    }

    detail::append_series_path(svg, result, v, s);

    svg += "<text x=\"6\" y=\"";
    detail::append_num(svg, s.y_top + 14.0);
    svg += "\" font-family=\"monospace\" font-size=\"13\">x" +
           std::to_string(v) + "</text>\n";
  }
  svg += "</svg>\n";

  detail::write_atomic(out_path, svg);
}

}  // namespace tsforge
