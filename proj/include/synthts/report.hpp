#pragma once

#include <span>
#include <string>
#include <vector>

#include "synthts/stats.hpp"

namespace synthts::report {

inline constexpr double kSvgWidth = 800.0;
inline constexpr double kSvgHeight = 400.0;

/// Affine data-to-pixel map for one plot area:
///   px = left + (x - x_min) / (x_max - x_min) * width
///   py = top + height - (y - y_min) / (y_max - y_min) * height
/// A degenerate range is widened by 0.5 on each side.
struct PlotFrame {
  double left = 60.0;
  double top = 20.0;
  double width = 720.0;
  double height = 340.0;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * width; }
  double py(double y) const { return top + height - (y - y_min) / (y_max - y_min) * height; }
  double data_x(double px_) const { return x_min + (px_ - left) / width * (x_max - x_min); }
  double data_y(double py_) const { return y_min + (top + height - py_) / height * (y_max - y_min); }
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Frame over all series with the ranges fitted to the data.
PlotFrame fit_frame(const std::vector<Series>& series, PlotFrame base = {});

struct Panel {
  std::string title;
  std::vector<Series> series;
  PlotFrame frame;
};

/// One 800x400 SVG; each series becomes a <polyline> with one point per value,
/// tagged with data-series and the frame's ranges (data-x-min, ...).
std::string render_svg(const std::string& title, const std::vector<Panel>& panels);

/// Lag-by-lag band (min/mean/max) with overlays. CSV columns:
/// lag,min,mean,max,<overlay names...>
struct AcfFigure {
  std::string svg;
  std::string csv;
};
AcfFigure acf_figure(const std::string& title, const AcfEnvelope& band,
                     const std::vector<std::pair<std::string, AcfResult>>& overlays);

/// Content / style / transfer cumulative price paths (starting at 1) side by
/// side. CSV columns: step,content,style,transfer.
struct TriptychFigure {
  std::string svg;
  std::string csv;
};
TriptychFigure triptych_figure(std::span<const double> content_returns,
                               std::span<const double> style_returns,
                               std::span<const double> transfer_returns);

std::vector<double> cumulative_price(std::span<const double> returns);

/// Table 1 / Table 3 layout: path_type,statistic,p_value_mean,p_value_std,reject_rate,verdict
std::string summary_table_csv(const std::vector<BatchSummary>& rows);

}  // namespace synthts::report
