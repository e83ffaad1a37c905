#include "ltn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltn/errors.hpp"
#include "ltn/io.hpp"

namespace ltn {

namespace {

constexpr double kLeft = 62, kRight = 16, kTop = 30, kBottom = 46;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double p0 = 0, p1 = 1;  // pixel positions of lo and hi

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double t = ((log ? std::log10(v) : v) - a) / (b - a);
    return p0 + t * (p1 - p0);
  }
  bool inside(double v) const { return (!log || v > 0) && std::isfinite(v); }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) t.push_back(v);
      }
      return t;
    }
    const double raw = (hi - lo) / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0})
      if (f * mag >= raw) {
        step = f * mag;
        break;
      }
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
  }
};

std::pair<double, double> data_range(const std::vector<Series>& ss, bool x, bool log) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : ss) {
    const auto& v = x ? s.x : s.y;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double e = (!x && k < s.err.size()) ? s.err[k] : 0.0;
      for (double c : {v[k] - e, v[k] + e}) {
        if (!std::isfinite(c) || (log && c <= 0)) continue;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }
  if (!std::isfinite(lo)) return log ? std::pair{1.0, 10.0} : std::pair{0.0, 1.0};
  if (log) {
    return {std::pow(10.0, std::floor(std::log10(lo))), std::pow(10.0, std::ceil(std::log10(hi)))};
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void render_panel(std::ostringstream& os, const Panel& panel, double ox, std::size_t id) {
  const PlotOptions& o = panel.options;
  Axis ax, ay;
  std::tie(ax.lo, ax.hi) = o.x_range.value_or(data_range(panel.series, true, o.log_x));
  std::tie(ay.lo, ay.hi) = o.y_range.value_or(data_range(panel.series, false, o.log_y));
  ax.log = o.log_x;
  ay.log = o.log_y;
  ax.p0 = ox + kLeft;
  ax.p1 = ox + o.width - kRight;
  ay.p0 = o.height - kBottom;
  ay.p1 = kTop;

  os << "<clipPath id=\"clip" << id << "\"><rect x=\"" << fmt(ax.p0) << "\" y=\"" << fmt(ay.p1)
     << "\" width=\"" << fmt(ax.p1 - ax.p0) << "\" height=\"" << fmt(ay.p0 - ay.p1)
     << "\"/></clipPath>\n";
  os << "<rect x=\"" << fmt(ax.p0) << "\" y=\"" << fmt(ay.p1) << "\" width=\"" << fmt(ax.p1 - ax.p0)
     << "\" height=\"" << fmt(ay.p0 - ay.p1) << "\" style=\"fill:none;stroke:#333;stroke-width:1\"/>\n";

  const std::string label_style = "font-family:sans-serif;font-size:11px;fill:#333";
  for (double t : ax.ticks()) {
    const double px = ax.map(t);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(ay.p0) << "\" x2=\"" << fmt(px) << "\" y2=\""
       << fmt(ay.p0 + 4) << "\" style=\"stroke:#333\"/>";
    os << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(ay.p0 + 16) << "\" style=\"" << label_style
       << ";text-anchor:middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t);
    os << "<line x1=\"" << fmt(ax.p0 - 4) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(ax.p0)
       << "\" y2=\"" << fmt(py) << "\" style=\"stroke:#333\"/>";
    os << "<text x=\"" << fmt(ax.p0 - 7) << "\" y=\"" << fmt(py + 4) << "\" style=\"" << label_style
       << ";text-anchor:end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt((ax.p0 + ax.p1) / 2) << "\" y=\"" << fmt(o.height - 10) << "\" style=\""
     << label_style << ";text-anchor:middle\">" << escape(o.xlabel) << "</text>\n";
  const double ymid = (ay.p0 + ay.p1) / 2;
  os << "<text x=\"" << fmt(ox + 14) << "\" y=\"" << fmt(ymid) << "\" transform=\"rotate(-90 "
     << fmt(ox + 14) << ' ' << fmt(ymid) << ")\" style=\"" << label_style << ";text-anchor:middle\">"
     << escape(o.ylabel) << "</text>\n";
  os << "<text x=\"" << fmt((ax.p0 + ax.p1) / 2) << "\" y=\"" << fmt(kTop - 10)
     << "\" style=\"font-family:sans-serif;font-size:13px;fill:#111;text-anchor:middle\">"
     << escape(o.title) << "</text>\n";

  os << "<g clip-path=\"url(#clip" << id << ")\">\n";
  for (const auto& s : panel.series) {
    const std::string stroke = "stroke:" + s.color;
    if (s.line) {
      os << "<polyline style=\"fill:none;" << stroke << ";stroke-width:1.5"
         << (s.dashed ? ";stroke-dasharray:5,3" : "") << "\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k)
        if (ax.inside(s.x[k]) && ay.inside(s.y[k]))
          os << fmt(ax.map(s.x[k])) << ',' << fmt(ay.map(s.y[k])) << ' ';
      os << "\"/>\n";
    }
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!ax.inside(s.x[k]) || !ay.inside(s.y[k])) continue;
      const double px = ax.map(s.x[k]), py = ay.map(s.y[k]);
      if (k < s.err.size() && s.err[k] > 0) {
        const double lo = s.y[k] - s.err[k], hi = s.y[k] + s.err[k];
        const double plo = ay.inside(lo) ? ay.map(lo) : ay.p0;
        os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(plo) << "\" x2=\"" << fmt(px) << "\" y2=\""
           << fmt(ay.map(hi)) << "\" style=\"" << stroke << "\"/>\n";
      }
      if (s.markers)
        os << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"3\" style=\"fill:"
           << s.color << "\"/>\n";
    }
  }
  os << "</g>\n";

  double ly = ay.p1 + 14;
  for (const auto& s : panel.series) {
    if (s.name.empty()) continue;
    const double lx = ax.p1 - 120;
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 18)
       << "\" y2=\"" << fmt(ly - 4) << "\" style=\"stroke:" << s.color << ";stroke-width:2"
       << (s.dashed ? ";stroke-dasharray:5,3" : "") << "\"/>";
    os << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(ly) << "\" style=\"" << label_style << "\">"
       << escape(s.name) << "</text>\n";
    ly += 15;
  }
}

}  // namespace

std::string panels_svg(const std::vector<Panel>& panels) {
  double width = 0, height = 0;
  for (const auto& p : panels) {
    width += p.options.width;
    height = std::max(height, p.options.height);
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
     << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" style=\"fill:#fff\"/>\n";
  double ox = 0;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    render_panel(os, panels[k], ox, k);
    ox += panels[k].options.width;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<Polyline> nullcline(const NetworkSpec& net, std::span<const double> d, std::size_t node,
                                double x_max, double y_max, std::size_t samples) {
  if (net.size() != 2 || d.size() != 2) throw InvalidArgument("nullcline: network must have 2 nodes");
  if (node > 1) throw InvalidArgument("nullcline: node must be 0 or 1");
  if (samples < 2) throw InvalidArgument("nullcline: need at least 2 samples");
  const std::size_t other = 1 - node;
  const double a = net.w(node, node), b = net.w(node, other);
  const double cap = net.m[node];
  const double own_max = node == 0 ? x_max : y_max;
  const double other_max = node == 0 ? y_max : x_max;

  // Along the other coordinate s, node's own value solving x = clip(a x + b s + d).
  auto inactive = [&](double c) -> std::optional<double> {
    if (c <= 0) return 0.0;
    return std::nullopt;
  };
  auto linear = [&](double c) -> std::optional<double> {
    if (std::abs(1 - a) < 1e-12) return std::nullopt;
    const double x = c / (1 - a);
    if (x >= 0 && x <= cap && x <= own_max) return x;
    return std::nullopt;
  };
  auto saturated = [&](double c) -> std::optional<double> {
    if (!net.m.finite(node)) return std::nullopt;
    if (a * cap + c >= cap && cap <= own_max) return cap;
    return std::nullopt;
  };

  std::vector<Polyline> out;
  for (int branch = 0; branch < 3; ++branch) {
    Polyline cur;
    for (std::size_t k = 0; k < samples; ++k) {
      const double s = other_max * static_cast<double>(k) / static_cast<double>(samples - 1);
      const double c = b * s + d[node];
      const std::optional<double> x = branch == 0 ? inactive(c) : branch == 1 ? linear(c) : saturated(c);
      if (x) {
        cur.push_back(node == 0 ? std::pair{*x, s} : std::pair{s, *x});
      } else if (!cur.empty()) {
        if (cur.size() > 1) out.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (cur.size() > 1) out.push_back(std::move(cur));
  }
  return out;
}

std::string phase_portrait_svg(const NetworkSpec& net, std::span<const double> d,
                               const std::vector<Trajectory>& trajectories,
                               const std::vector<Equilibrium>& equilibria,
                               const PortraitOptions& opt) {
  Panel panel;
  panel.options.title = opt.title;
  panel.options.xlabel = net.labels.size() == 2 ? net.labels[0] : "x0";
  panel.options.ylabel = net.labels.size() == 2 ? net.labels[1] : "x1";
  panel.options.x_range = std::pair{0.0, opt.x_max};
  panel.options.y_range = std::pair{0.0, opt.y_max};
  panel.options.width = 460;
  panel.options.height = 440;

  for (const auto& traj : trajectories) {
    Series s;
    s.color = "#9aa7b5";
    s.markers = false;
    for (const auto& x : traj.x) {
      s.x.push_back(x[0]);
      s.y.push_back(x[1]);
    }
    panel.series.push_back(std::move(s));
  }
  const char* colors[2] = {"#d62728", "#2ca02c"};
  for (std::size_t node = 0; node < 2; ++node) {
    bool first = true;
    for (const auto& pl : nullcline(net, d, node, opt.x_max, opt.y_max)) {
      Series s;
      s.color = colors[node];
      s.markers = false;
      if (first) s.name = "x" + std::to_string(node) + "' = 0";
      first = false;
      for (const auto& [x, y] : pl) {
        s.x.push_back(x);
        s.y.push_back(y);
      }
      panel.series.push_back(std::move(s));
    }
  }
  std::string svg = panels_svg({panel});

  // Equilibria go on top: filled when stable, hollow otherwise.
  std::ostringstream marks;
  const double x0 = kLeft, x1 = panel.options.width - kRight;
  const double y0 = panel.options.height - kBottom, y1 = kTop;
  for (const auto& e : equilibria) {
    if (!e.valid) continue;
    const double px = x0 + e.state[0] / opt.x_max * (x1 - x0);
    const double py = y0 + e.state[1] / opt.y_max * (y1 - y0);
    const bool stable = e.stability == Stability::Stable;
    marks << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"5\" style=\"fill:"
          << (stable ? "#111" : "#fff") << ";stroke:#111;stroke-width:1.5\"><title>" << e.sigma.str()
          << ' ' << to_string(e.stability) << "</title></circle>\n";
  }
  svg.insert(svg.rfind("</svg>"), marks.str());
  return svg;
}

std::string ensemble_svg(const EnsembleReport& rep, const ScalingFit* fit, bool swept) {
  Panel probs;
  probs.options.title = swept ? "class probability vs mu" : "class probability vs n";
  probs.options.xlabel = swept ? "mu" : "n";
  probs.options.ylabel = "probability";
  probs.options.y_range = std::pair{-0.02, 1.02};
  Series p{"I - W in P", {}, {}, {}, "#1f77b4"};
  Series h{"-I + W in H", {}, {}, {}, "#ff7f0e"};
  h.dashed = true;
  Series s{"rho(|W|) < 1", {}, {}, {}, "#2ca02c"};
  for (const auto& r : rep.rows) {
    const double x = swept ? r.parameter : static_cast<double>(r.n);
    if (r.p_matrix) {
      p.x.push_back(x);
      p.y.push_back(r.p_matrix->p);
      p.err.push_back(2 * r.p_matrix->sem);
    }
    if (r.hurwitz) {
      h.x.push_back(x);
      h.y.push_back(r.hurwitz->p);
      h.err.push_back(2 * r.hurwitz->sem);
    }
    s.x.push_back(x);
    s.y.push_back(r.abs_schur.p);
    s.err.push_back(2 * r.abs_schur.sem);
  }
  for (Series* ser : {&p, &h, &s})
    if (!ser->x.empty()) probs.series.push_back(*ser);
  std::vector<Panel> panels{probs};

  if (fit) {
    Panel rho;
    rho.options.title = "mean rho(|W|) vs n";
    rho.options.xlabel = "n";
    rho.options.ylabel = "geometric mean rho(|W|)";
    rho.options.log_x = rho.options.log_y = true;
    Series pts{"samples", {}, {}, {}, "#1f77b4"};
    pts.line = false;
    Series line{"fit", {}, {}, {}, "#d62728"};
    line.markers = false;
    line.dashed = true;
    for (std::size_t k = 0; k < fit->n_values.size(); ++k) {
      const double n = static_cast<double>(fit->n_values[k]);
      pts.x.push_back(n);
      pts.y.push_back(std::pow(fit->log_base, fit->mean_log_rho[k]));
      line.x.push_back(n);
      line.y.push_back(std::pow(fit->log_base, fit->alpha * std::log(n) / std::log(fit->log_base) + fit->beta));
    }
    line.name = "alpha = " + tick_label(fit->alpha) + ", beta = " + tick_label(fit->beta);
    rho.series = {pts, line};
    panels.push_back(rho);
  }
  return panels_svg(panels);
}

}  // namespace ltn
