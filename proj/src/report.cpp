#include "synthts/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "synthts/error.hpp"
#include "synthts/format.hpp"

namespace synthts::report {

PlotFrame fit_frame(const std::vector<Series>& series, PlotFrame f) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!std::isfinite(xmin)) xmin = xmax = 0.0;
  if (!std::isfinite(ymin)) ymin = ymax = 0.0;
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  f.x_min = xmin;
  f.x_max = xmax;
  f.y_min = ymin;
  f.y_max = ymax;
  return f;
}

namespace {

std::string escape(const std::string& s) {
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

std::string attr(const char* name, double v) { return std::string(" ") + name + "=\"" + format_double(v) + "\""; }

}  // namespace

std::string render_svg(const std::string& title, const std::vector<Panel>& panels) {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" viewBox=\"0 0 800 400\">\n";
  out += "<title>" + escape(title) + "</title>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"400\" fill=\"white\"/>\n";
  for (const auto& p : panels) {
    const PlotFrame& f = p.frame;
    out += "<g class=\"panel\"" + attr("data-left", f.left) + attr("data-top", f.top) + attr("data-width", f.width) +
           attr("data-height", f.height) + ">\n";
    out += "<rect" + attr("x", f.left) + attr("y", f.top) + attr("width", f.width) + attr("height", f.height) +
           " fill=\"none\" stroke=\"#999\"/>\n";
    if (!p.title.empty())
      out += "<text" + attr("x", f.left) + attr("y", f.top - 6) + " font-size=\"12\">" + escape(p.title) + "</text>\n";
    out += "<text" + attr("x", f.left - 4) + attr("y", f.top + 10) + " font-size=\"10\" text-anchor=\"end\">" +
           format_double(f.y_max) + "</text>\n";
    out += "<text" + attr("x", f.left - 4) + attr("y", f.top + f.height) +
           " font-size=\"10\" text-anchor=\"end\">" + format_double(f.y_min) + "</text>\n";
    for (const auto& s : p.series) {
      if (s.x.size() != s.y.size()) throw InvalidArgument("series '" + s.name + "' has mismatched x/y");
      out += "<polyline data-series=\"" + escape(s.name) + "\"" + attr("data-x-min", f.x_min) +
             attr("data-x-max", f.x_max) + attr("data-y-min", f.y_min) + attr("data-y-max", f.y_max) +
             " fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.2\"" +
             (s.dashed ? " stroke-dasharray=\"4 3\"" : "") + " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out += ' ';
        out += format_double(f.px(s.x[i]));
        out += ',';
        out += format_double(f.py(s.y[i]));
      }
      out += "\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

AcfFigure acf_figure(const std::string& title, const AcfEnvelope& band,
                     const std::vector<std::pair<std::string, AcfResult>>& overlays) {
  const std::size_t L = band.min.size();
  std::vector<double> lags(L);
  for (std::size_t k = 0; k < L; ++k) lags[k] = static_cast<double>(k + 1);
  std::vector<Series> series{{"min", lags, band.min, "#7f7f7f", true},
                             {"mean", lags, band.mean, "#2ca02c", false},
                             {"max", lags, band.max, "#7f7f7f", true}};
  static const char* palette[] = {"#d62728", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b"};
  for (std::size_t i = 0; i < overlays.size(); ++i) {
    if (overlays[i].second.values.size() != L)
      throw InvalidArgument("acf overlay '" + overlays[i].first + "' has a different lag count");
    series.push_back({overlays[i].first, lags, overlays[i].second.values, palette[i % 5], false});
  }
  Panel panel{"autocorrelation by lag", series, fit_frame(series)};

  AcfFigure fig;
  fig.svg = render_svg(title, {panel});
  fig.csv = "lag,min,mean,max";
  for (const auto& o : overlays) fig.csv += "," + o.first;
  fig.csv += '\n';
  for (std::size_t k = 0; k < L; ++k) {
    fig.csv += std::to_string(k + 1) + ',' + format_double(band.min[k]) + ',' + format_double(band.mean[k]) + ',' +
               format_double(band.max[k]);
    for (const auto& o : overlays) fig.csv += ',' + format_double(o.second.values[k]);
    fig.csv += '\n';
  }
  return fig;
}

std::vector<double> cumulative_price(std::span<const double> returns) {
  std::vector<double> p{1.0};
  double log_p = 0.0;
  for (double r : returns) {
    log_p += r;
    p.push_back(std::exp(log_p));
  }
  return p;
}

TriptychFigure triptych_figure(std::span<const double> content, std::span<const double> style,
                               std::span<const double> transfer) {
  if (content.size() != style.size() || content.size() != transfer.size())
    throw InvalidArgument("triptych: paths must have equal length");
  const std::array<std::pair<const char*, std::vector<double>>, 3> paths{
      {{"content", cumulative_price(content)}, {"style", cumulative_price(style)}, {"transfer", cumulative_price(transfer)}}};
  std::vector<double> steps(paths[0].second.size());
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<double>(i);

  std::vector<Panel> panels;
  const double panel_w = kSvgWidth / 3.0;
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<Series> s{{paths[p].first, steps, paths[p].second, "#1f77b4", false}};
    PlotFrame base;
    base.left = static_cast<double>(p) * panel_w + 50.0;
    base.top = 30.0;
    base.width = panel_w - 65.0;
    base.height = 330.0;
    panels.push_back({paths[p].first, s, fit_frame(s, base)});
  }
  TriptychFigure fig;
  fig.svg = render_svg("content / style / style transfer", panels);
  fig.csv = "step,content,style,transfer\n";
  for (std::size_t i = 0; i < steps.size(); ++i)
    fig.csv += std::to_string(i) + ',' + format_double(paths[0].second[i]) + ',' + format_double(paths[1].second[i]) +
               ',' + format_double(paths[2].second[i]) + '\n';
  return fig;
}

std::string summary_table_csv(const std::vector<BatchSummary>& rows) {
  std::string out = "path_type,statistic,p_value_mean,p_value_std,reject_rate,verdict\n";
  for (const auto& r : rows)
    out += r.path_type + ',' + r.statistic + ',' + format_double(r.p_mean) + ',' + format_double(r.p_std) + ',' +
           format_double(r.reject_rate) + ',' + r.verdict() + '\n';
  return out;
}

}  // namespace synthts::report
