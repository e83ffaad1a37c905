#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ltn/dynamics.hpp"
#include "ltn/ensemble.hpp"
#include "ltn/equilibria.hpp"
#include "ltn/model.hpp"

namespace ltn {

/// Self-contained SVG output; every style is inline.

struct Series {
  std::string name;
  std::vector<double> x, y;
  /// Symmetric error bars (empty for none).
  std::vector<double> err;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = true;
  bool dashed = false;
};

struct PlotOptions {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::optional<std::pair<double, double>> x_range, y_range;
  double width = 420, height = 320;
};

struct Panel {
  std::vector<Series> series;
  PlotOptions options;
};

/// Panels laid out left to right.
std::string panels_svg(const std::vector<Panel>& panels);

using Polyline = std::vector<std::pair<double, double>>;

/// Set where x_i' = 0 for a 2-node network, inside [0, x_max] x [0, y_max],
/// as polylines in (x0, x1) coordinates. Each regime branch is traced
/// separately and broken where it leaves its region.
std::vector<Polyline> nullcline(const NetworkSpec& net, std::span<const double> d, std::size_t node,
                                double x_max, double y_max, std::size_t samples = 400);

struct PortraitOptions {
  double x_max = 5.0, y_max = 5.0;
  std::string title;
};

/// Trajectories, both nullclines and the equilibria (filled when stable).
std::string phase_portrait_svg(const NetworkSpec& net, std::span<const double> d,
                               const std::vector<Trajectory>& trajectories,
                               const std::vector<Equilibrium>& equilibria,
                               const PortraitOptions& opt = {});

/// Class probabilities against n (or the swept mu) with s.e.m. bars, plus the
/// log-log spectral radius panel when a fit is given.
std::string ensemble_svg(const EnsembleReport& rep, const ScalingFit* fit, bool swept = false);

}  // namespace ltn
