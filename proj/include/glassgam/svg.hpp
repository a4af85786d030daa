#pragma once

// Self-contained SVG emission for shape plots, reliability diagrams, sweep
// panels, and importance bars. No external plotting dependency; output is
// deterministic (fixed-precision coordinates, stable ordering) so plot files
// can be compared byte-for-byte across runs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "glassgam/frechet.hpp"
#include "glassgam/metrics.hpp"
#include "glassgam/model.hpp"
#include "glassgam/robustness.hpp"

namespace glassgam {
namespace svg {

inline std::string num(double v, int precision = 2) {
  if (!std::isfinite(v)) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

inline std::string label_num(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick spacing covering [lo, hi] with roughly `target` ticks.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) return {lo};
  const double raw_step = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double step = mag;
  for (const double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw_step) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  const double start = std::ceil(lo / step) * step;
  for (double t = start; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

struct Frame {
  double width = 640, height = 400;
  double ml = 56, mr = 16, mt = 28, mb = 40;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // data ranges

  double px(double x) const { return ml + (x - x0) / (x1 - x0) * (width - ml - mr); }
  double py(double y) const { return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb); }
};

inline void expand_range(double& lo, double& hi) {
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

inline std::string open_tag(const Frame& f, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width, 0) +
                  "\" height=\"" + num(f.height, 0) + "\" viewBox=\"0 0 " + num(f.width, 0) +
                  " " + num(f.height, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    s += "<text x=\"" + num(f.width / 2) + "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">" +
         escape(title) + "</text>\n";
  }
  return s;
}

inline std::string axes(const Frame& f, const std::string& x_label,
                        const std::string& y_label) {
  std::string s;
  const double bx = f.height - f.mb;
  s += "<line x1=\"" + num(f.ml) + "\" y1=\"" + num(bx) + "\" x2=\"" + num(f.width - f.mr) +
       "\" y2=\"" + num(bx) + "\" stroke=\"#333\"/>\n";
  s += "<line x1=\"" + num(f.ml) + "\" y1=\"" + num(f.mt) + "\" x2=\"" + num(f.ml) +
       "\" y2=\"" + num(bx) + "\" stroke=\"#333\"/>\n";
  for (const double t : nice_ticks(f.x0, f.x1)) {
    if (t < f.x0 || t > f.x1) continue;
    const double x = f.px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(bx) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(bx + 4) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(bx + 16) + "\" text-anchor=\"middle\">" +
         label_num(t) + "</text>\n";
  }
  for (const double t : nice_ticks(f.y0, f.y1)) {
    if (t < f.y0 || t > f.y1) continue;
    const double y = f.py(t);
    s += "<line x1=\"" + num(f.ml - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.ml) +
         "\" y2=\"" + num(y) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(f.ml - 7) + "\" y=\"" + num(y + 3) +
         "\" text-anchor=\"end\">" + label_num(t) + "</text>\n";
  }
  if (!x_label.empty()) {
    s += "<text x=\"" + num((f.ml + f.width - f.mr) / 2) + "\" y=\"" + num(f.height - 8) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  }
  if (!y_label.empty()) {
    s += "<text x=\"14\" y=\"" + num((f.mt + bx) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num((f.mt + bx) / 2) + ")\">" + escape(y_label) + "</text>\n";
  }
  return s;
}

inline std::string polyline_path(const Frame& f, const std::vector<Point2>& pts,
                                 const std::string& stroke, double width = 1.5,
                                 const std::string& extra = "") {
  if (pts.empty()) return "";
  std::string s = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
                  num(width, 1) + "\" " + extra + " points=\"";
  for (const auto& p : pts) {
    s += num(f.px(p.x)) + "," + num(f.py(p.y)) + " ";
  }
  s += "\"/>\n";
  return s;
}

}  // namespace svg

// Continuous shapes render as a step function over the bin grid with a
// translucent band at value +/- stderr; categorical shapes as per-category
// markers with error whiskers.
inline std::string svg_shape_plot(const ShapeFunction& shape, const std::string& title = "") {
  svg::Frame f;
  const std::string name = title.empty() ? shape.feature : title;
  const std::size_t B = shape.values.size();
  double y_lo = 0.0, y_hi = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    y_lo = std::min(y_lo, shape.values[b] - shape.stderrs[b]);
    y_hi = std::max(y_hi, shape.values[b] + shape.stderrs[b]);
  }
  svg::expand_range(y_lo, y_hi);
  f.y0 = y_lo;
  f.y1 = y_hi;

  std::string s;
  if (shape.bins.kind == ColumnKind::continuous) {
    f.x0 = shape.bins.value_min;
    f.x1 = shape.bins.value_max;
    if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
    s += svg::open_tag(f, name);
    auto edge = [&](std::size_t b) {
      return b == 0 ? shape.bins.value_min
                    : (b == B ? shape.bins.value_max : shape.bins.cuts[b - 1]);
    };
    // stderr band as a step-shaped polygon
    std::string band = "<polygon fill=\"#4d88ff\" fill-opacity=\"0.18\" points=\"";
    for (std::size_t b = 0; b < B; ++b) {
      const double top = shape.values[b] + shape.stderrs[b];
      band += svg::num(f.px(edge(b))) + "," + svg::num(f.py(top)) + " ";
      band += svg::num(f.px(edge(b + 1))) + "," + svg::num(f.py(top)) + " ";
    }
    for (std::size_t b = B; b-- > 0;) {
      const double bot = shape.values[b] - shape.stderrs[b];
      band += svg::num(f.px(edge(b + 1))) + "," + svg::num(f.py(bot)) + " ";
      band += svg::num(f.px(edge(b))) + "," + svg::num(f.py(bot)) + " ";
    }
    band += "\"/>\n";
    s += band;
    std::vector<Point2> steps;
    for (std::size_t b = 0; b < B; ++b) {
      steps.push_back({edge(b), shape.values[b]});
      steps.push_back({edge(b + 1), shape.values[b]});
    }
    s += svg::polyline_path(f, steps, "#1f4fd1");
    s += svg::axes(f, shape.feature, "contribution (log-odds)");
  } else {
    f.x0 = -0.5;
    f.x1 = static_cast<double>(B) - 0.5;
    s += svg::open_tag(f, name);
    const double zero_y = f.py(std::clamp(0.0, f.y0, f.y1));
    s += "<line x1=\"" + svg::num(f.ml) + "\" y1=\"" + svg::num(zero_y) + "\" x2=\"" +
         svg::num(f.width - f.mr) + "\" y2=\"" + svg::num(zero_y) +
         "\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n";
    for (std::size_t b = 0; b < B; ++b) {
      const double x = f.px(static_cast<double>(b));
      const double y = f.py(shape.values[b]);
      s += "<line x1=\"" + svg::num(x) + "\" y1=\"" +
           svg::num(f.py(shape.values[b] - shape.stderrs[b])) + "\" x2=\"" + svg::num(x) +
           "\" y2=\"" + svg::num(f.py(shape.values[b] + shape.stderrs[b])) +
           "\" stroke=\"#888\"/>\n";
      s += "<circle cx=\"" + svg::num(x) + "\" cy=\"" + svg::num(y) +
           "\" r=\"3.5\" fill=\"#1f4fd1\"/>\n";
      std::string lab = shape.bins.category_labels[b];
      if (lab.size() > 10) lab = lab.substr(0, 9) + "~";
      s += "<text x=\"" + svg::num(x) + "\" y=\"" + svg::num(f.height - f.mb + 16) +
           "\" text-anchor=\"middle\">" + svg::escape(lab) + "</text>\n";
    }
    // axis lines and y ticks only; category labels already drawn on x
    const double bx = f.height - f.mb;
    s += "<line x1=\"" + svg::num(f.ml) + "\" y1=\"" + svg::num(bx) + "\" x2=\"" +
         svg::num(f.width - f.mr) + "\" y2=\"" + svg::num(bx) + "\" stroke=\"#333\"/>\n";
    s += "<line x1=\"" + svg::num(f.ml) + "\" y1=\"" + svg::num(f.mt) + "\" x2=\"" +
         svg::num(f.ml) + "\" y2=\"" + svg::num(bx) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"14\" y=\"" + svg::num((f.mt + bx) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + svg::num((f.mt + bx) / 2) +
         ")\">contribution (log-odds)</text>\n";
    for (const double t : svg::nice_ticks(f.y0, f.y1)) {
      if (t < f.y0 || t > f.y1) continue;
      const double y = f.py(t);
      s += "<line x1=\"" + svg::num(f.ml - 4) + "\" y1=\"" + svg::num(y) + "\" x2=\"" +
           svg::num(f.ml) + "\" y2=\"" + svg::num(y) + "\" stroke=\"#333\"/>\n";
      s += "<text x=\"" + svg::num(f.ml - 7) + "\" y=\"" + svg::num(y + 3) +
           "\" text-anchor=\"end\">" + svg::label_num(t) + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

// Reliability diagram: mean predicted vs observed rate per bin, one series
// per named report, with the identity diagonal for reference.
inline std::string svg_calibration_plot(
    const std::vector<std::pair<std::string, CalibrationReport>>& reports,
    const std::string& title = "calibration") {
  svg::Frame f;
  f.x0 = 0;
  f.y0 = 0;
  double hi = 0.0;
  for (const auto& [name, rep] : reports) {
    for (const auto& bin : rep.bins) {
      hi = std::max({hi, bin.mean_predicted, bin.observed_rate});
    }
  }
  hi = std::min(1.0, hi * 1.15 + 1e-3);
  f.x1 = hi;
  f.y1 = hi;
  std::string s = svg::open_tag(f, title);
  s += "<line x1=\"" + svg::num(f.px(0)) + "\" y1=\"" + svg::num(f.py(0)) + "\" x2=\"" +
       svg::num(f.px(hi)) + "\" y2=\"" + svg::num(f.py(hi)) +
       "\" stroke=\"#aaa\" stroke-dasharray=\"4,4\"/>\n";
  static const char* palette[] = {"#1f4fd1", "#d1371f", "#1f9d3a", "#9d1f8e"};
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& rep = reports[k].second;
    const std::string color = palette[k % 4];
    std::vector<Point2> pts;
    for (const auto& bin : rep.bins) pts.push_back({bin.mean_predicted, bin.observed_rate});
    s += svg::polyline_path(f, pts, color);
    for (const auto& p : pts) {
      s += "<circle cx=\"" + svg::num(f.px(p.x)) + "\" cy=\"" + svg::num(f.py(p.y)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<text x=\"" + svg::num(f.width - f.mr - 4) + "\" y=\"" +
         svg::num(f.mt + 14 + 14 * static_cast<double>(k)) + "\" text-anchor=\"end\" fill=\"" +
         color + "\">" + svg::escape(reports[k].first) + "</text>\n";
  }
  s += svg::axes(f, "mean predicted probability", "observed rate");
  s += "</svg>\n";
  return s;
}

// Small-multiples panel: the reference shape (grey) behind each subset
// shape, annotated with size, positive count, and distance.
inline std::string svg_sweep_panel(const FeatureSweep& fs) {
  const std::size_t n = fs.entries.size();
  const std::size_t cols = std::min<std::size_t>(4, std::max<std::size_t>(1, n));
  const std::size_t rows = (n + cols - 1) / cols;
  const double cell_w = 220, cell_h = 160;
  const double W = cell_w * static_cast<double>(cols);
  const double H = cell_h * static_cast<double>(rows) + 24;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::num(W, 0) +
                  "\" height=\"" + svg::num(H, 0) + "\" viewBox=\"0 0 " + svg::num(W, 0) + " " +
                  svg::num(H, 0) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + svg::num(W / 2) + "\" y=\"15\" text-anchor=\"middle\" font-size=\"13\">" +
       svg::escape(fs.feature) + " across training sizes</text>\n";

  const bool continuous = fs.is_continuous;
  Polyline ref_line;
  double y_lo = 0, y_hi = 0;
  if (continuous) {
    ref_line = shape_to_polyline(fs.reference, XScaling::unit_interval,
                                 std::pair{fs.reference.bins.value_min,
                                           fs.reference.bins.value_max});
  }
  auto scan = [&](const ShapeFunction& sh) {
    for (std::size_t b = 0; b < sh.values.size(); ++b) {
      y_lo = std::min(y_lo, sh.values[b]);
      y_hi = std::max(y_hi, sh.values[b]);
    }
  };
  scan(fs.reference);
  for (const auto& e : fs.entries) {
    if (!e.degenerate) scan(e.shape);
  }
  svg::expand_range(y_lo, y_hi);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = fs.entries[i];
    const double ox = static_cast<double>(i % cols) * cell_w;
    const double oy = 24 + static_cast<double>(i / cols) * cell_h;
    svg::Frame f;
    f.width = cell_w;
    f.height = cell_h;
    f.ml = 10;
    f.mr = 8;
    f.mt = 18;
    f.mb = 8;
    f.x0 = 0;
    f.x1 = 1;
    f.y0 = y_lo;
    f.y1 = y_hi;
    s += "<g transform=\"translate(" + svg::num(ox) + "," + svg::num(oy) + ")\">\n";
    s += "<rect x=\"1\" y=\"1\" width=\"" + svg::num(cell_w - 2) + "\" height=\"" +
         svg::num(cell_h - 2) + "\" fill=\"none\" stroke=\"#ddd\"/>\n";
    std::string note = "n=" + std::to_string(e.size) + " pos=" + std::to_string(e.positives);
    if (e.degenerate) {
      note += " (degenerate)";
    } else {
      note += " d=" + svg::label_num(e.distance);
    }
    s += "<text x=\"" + svg::num(cell_w / 2) + "\" y=\"13\" text-anchor=\"middle\">" + note +
         "</text>\n";
    if (!e.degenerate) {
      if (continuous) {
        s += svg::polyline_path(f, ref_line.points, "#bbb", 1.2);
        const auto line = shape_to_polyline(
            e.shape, XScaling::unit_interval,
            std::pair{fs.reference.bins.value_min, fs.reference.bins.value_max});
        s += svg::polyline_path(f, line.points, "#1f4fd1", 1.5);
      } else {
        const std::size_t B = fs.reference.values.size();
        for (std::size_t b = 0; b < B; ++b) {
          if (fs.reference.bins.counts[b] <= 0) continue;
          const double x = (static_cast<double>(b) + 0.5) / static_cast<double>(B);
          const int ab = bin_of(e.shape.bins,
                                std::string_view(fs.reference.bins.category_labels[b]));
          s += "<circle cx=\"" + svg::num(f.px(x)) + "\" cy=\"" +
               svg::num(f.py(fs.reference.values[b])) + "\" r=\"2.5\" fill=\"#bbb\"/>\n";
          s += "<circle cx=\"" + svg::num(f.px(x)) + "\" cy=\"" +
               svg::num(f.py(e.shape.values[static_cast<std::size_t>(ab)])) +
               "\" r=\"2.5\" fill=\"#1f4fd1\"/>\n";
        }
      }
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

// Normalized distance vs training size (log10 x), one series per feature.
inline std::string svg_distance_curves(const SweepResult& sweep,
                                       const std::string& title = "shape distance vs size") {
  svg::Frame f;
  f.x0 = std::log10(static_cast<double>(sweep.sizes.front()));
  f.x1 = std::log10(static_cast<double>(sweep.sizes.back()));
  if (f.x1 <= f.x0) f.x1 = f.x0 + 1;
  double y_hi = 1.0;
  for (const auto& fs : sweep.features) {
    for (const double v : fs.normalized) y_hi = std::max(y_hi, v);
  }
  f.y0 = 0;
  f.y1 = y_hi * 1.08;
  std::string s = svg::open_tag(f, title);
  static const char* palette[] = {"#1f4fd1", "#d1371f", "#1f9d3a", "#9d1f8e",
                                  "#c7861d", "#17899d"};
  for (std::size_t k = 0; k < sweep.features.size(); ++k) {
    const auto& fs = sweep.features[k];
    const std::string color = palette[k % 6];
    std::vector<Point2> pts;
    std::size_t at = 0;
    for (const auto& e : fs.entries) {
      if (e.degenerate) continue;
      pts.push_back({std::log10(static_cast<double>(e.size)), fs.normalized[at++]});
    }
    s += svg::polyline_path(f, pts, color);
    for (const auto& p : pts) {
      s += "<circle cx=\"" + svg::num(f.px(p.x)) + "\" cy=\"" + svg::num(f.py(p.y)) +
           "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    s += "<text x=\"" + svg::num(f.width - f.mr - 4) + "\" y=\"" +
         svg::num(f.mt + 14 + 13 * static_cast<double>(k)) + "\" text-anchor=\"end\" fill=\"" +
         color + "\">" + svg::escape(fs.feature) +
         (fs.normalize_passthrough ? " (raw)" : "") + "</text>\n";
  }
  // x ticks at the actual sizes
  const double bx = f.height - f.mb;
  for (const auto size : sweep.sizes) {
    const double x = f.px(std::log10(static_cast<double>(size)));
    s += "<line x1=\"" + svg::num(x) + "\" y1=\"" + svg::num(bx) + "\" x2=\"" + svg::num(x) +
         "\" y2=\"" + svg::num(bx + 4) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + svg::num(x) + "\" y=\"" + svg::num(bx + 16) +
         "\" text-anchor=\"middle\">" + std::to_string(size) + "</text>\n";
  }
  s += "<line x1=\"" + svg::num(f.ml) + "\" y1=\"" + svg::num(bx) + "\" x2=\"" +
       svg::num(f.width - f.mr) + "\" y2=\"" + svg::num(bx) + "\" stroke=\"#333\"/>\n";
  s += "<line x1=\"" + svg::num(f.ml) + "\" y1=\"" + svg::num(f.mt) + "\" x2=\"" +
       svg::num(f.ml) + "\" y2=\"" + svg::num(bx) + "\" stroke=\"#333\"/>\n";
  for (const double t : svg::nice_ticks(f.y0, f.y1)) {
    if (t < f.y0 || t > f.y1) continue;
    s += "<line x1=\"" + svg::num(f.ml - 4) + "\" y1=\"" + svg::num(f.py(t)) + "\" x2=\"" +
         svg::num(f.ml) + "\" y2=\"" + svg::num(f.py(t)) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + svg::num(f.ml - 7) + "\" y=\"" + svg::num(f.py(t) + 3) +
         "\" text-anchor=\"end\">" + svg::label_num(t) + "</text>\n";
  }
  s += "<text x=\"" + svg::num((f.ml + f.width - f.mr) / 2) + "\" y=\"" +
       svg::num(f.height - 8) + "\" text-anchor=\"middle\">training rows</text>\n";
  s += "</svg>\n";
  return s;
}

inline std::string svg_importance_plot(const std::vector<ImportanceEntry>& entries,
                                       std::size_t top_n = 15,
                                       const std::string& title = "feature importance") {
  const std::size_t n = std::min(top_n, entries.size());
  const double row_h = 22;
  svg::Frame f;
  f.height = 60 + row_h * static_cast<double>(n);
  f.ml = 150;
  double hi = 1e-12;
  for (std::size_t i = 0; i < n; ++i) hi = std::max(hi, entries[i].importance);
  std::string s = svg::open_tag(f, title);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = f.mt + 8 + row_h * static_cast<double>(i);
    const double w = (f.width - f.ml - f.mr) * entries[i].importance / hi;
    s += "<rect x=\"" + svg::num(f.ml) + "\" y=\"" + svg::num(y) + "\" width=\"" + svg::num(w) +
         "\" height=\"" + svg::num(row_h - 6) + "\" fill=\"" +
         (entries[i].is_interaction ? "#d1371f" : "#1f4fd1") + "\"/>\n";
    std::string name = entries[i].name;
    if (name.size() > 20) name = name.substr(0, 19) + "~";
    s += "<text x=\"" + svg::num(f.ml - 6) + "\" y=\"" + svg::num(y + row_h / 2 + 2) +
         "\" text-anchor=\"end\">" + svg::escape(name) + "</text>\n";
    s += "<text x=\"" + svg::num(f.ml + w + 4) + "\" y=\"" + svg::num(y + row_h / 2 + 2) +
         "\">" + svg::label_num(entries[i].importance) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace glassgam
