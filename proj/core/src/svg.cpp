#include "packcool/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace packcool {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 24.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 52.0;

std::string fixed2(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string sig4(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void widen(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

struct Mapper {
  Range xr, yr;
  double px(double x) const { return kLeft + xr.frac(x) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - yr.frac(y) * (kHeight - kTop - kBottom); }
};

void open_svg(std::ofstream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(kWidth) << "\" height=\""
      << fixed2(kHeight) << "\" viewBox=\"0 0 " << fixed2(kWidth) << " " << fixed2(kHeight)
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

void draw_frame_and_title(std::ofstream& out, const SvgAxes& axes) {
  out << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\""
      << fixed2(kWidth - kLeft - kRight) << "\" height=\"" << fixed2(kHeight - kTop - kBottom)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fixed2(kWidth / 2.0) << "\" y=\"22\" font-family=\"sans-serif\" "
      << "font-size=\"15\" text-anchor=\"middle\">" << axes.title << "</text>\n";
  out << "<text x=\"" << fixed2((kLeft + kWidth - kRight) / 2.0) << "\" y=\""
      << fixed2(kHeight - 14.0) << "\" font-family=\"sans-serif\" font-size=\"13\" "
      << "text-anchor=\"middle\">" << axes.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << fixed2((kTop + kHeight - kBottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << fixed2((kTop + kHeight - kBottom) / 2.0) << ")\">"
      << axes.y_label << "</text>\n";
}

void draw_ticks(std::ofstream& out, const Mapper& m) {
  for (int i = 0; i <= 4; ++i) {
    const double fx = m.xr.lo + (m.xr.hi - m.xr.lo) * i / 4.0;
    const double px = m.px(fx);
    out << "<line x1=\"" << fixed2(px) << "\" y1=\"" << fixed2(kHeight - kBottom) << "\" x2=\""
        << fixed2(px) << "\" y2=\"" << fixed2(kHeight - kBottom + 5.0)
        << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fixed2(px) << "\" y=\"" << fixed2(kHeight - kBottom + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << sig4(fx)
        << "</text>\n";
    const double fy = m.yr.lo + (m.yr.hi - m.yr.lo) * i / 4.0;
    const double py = m.py(fy);
    out << "<line x1=\"" << fixed2(kLeft - 5.0) << "\" y1=\"" << fixed2(py) << "\" x2=\""
        << fixed2(kLeft) << "\" y2=\"" << fixed2(py)
        << "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fixed2(kLeft - 8.0) << "\" y=\"" << fixed2(py + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << sig4(fy)
        << "</text>\n";
  }
}

// Two-segment ramp: dark blue at 0, near-white at 0.5, dark red at 1.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int blue[3] = {33, 102, 172};
  const int white[3] = {247, 247, 247};
  const int red[3] = {178, 24, 43};
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    const double v = t < 0.5 ? blue[c] + (white[c] - blue[c]) * (t / 0.5)
                             : white[c] + (red[c] - white[c]) * ((t - 0.5) / 0.5);
    rgb[c] = static_cast<int>(std::lround(v));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

void write_line_svg(const std::filesystem::path& path, const std::vector<SvgSeries>& series,
                    const SvgAxes& axes) {
  if (series.empty()) throw std::invalid_argument("write_line_svg: no series");
  Mapper m;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_line_svg: x/y length mismatch");
    if (!s.band_low.empty() &&
        (s.band_low.size() != s.y.size() || s.band_high.size() != s.y.size()))
      throw std::invalid_argument("write_line_svg: band length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        m.xr = {s.x[i], s.x[i]};
        m.yr = {s.y[i], s.y[i]};
        first = false;
      }
      m.xr.widen(s.x[i]);
      m.yr.widen(s.y[i]);
      if (!s.band_low.empty()) {
        m.yr.widen(s.band_low[i]);
        m.yr.widen(s.band_high[i]);
      }
    }
  }
  if (first) throw std::invalid_argument("write_line_svg: all series empty");
  m.xr.pad();
  m.yr.pad();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_line_svg: cannot open " + path.string());
  open_svg(out);
  draw_frame_and_title(out, axes);
  draw_ticks(out, m);

  for (const auto& s : series) {
    if (!s.band_low.empty() && s.x.size() > 1) {
      out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.22\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << fixed2(m.px(s.x[i])) << "," << fixed2(m.py(s.band_high[i])) << " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        out << fixed2(m.px(s.x[i])) << "," << fixed2(m.py(s.band_low[i])) << " ";
      out << "\"/>\n";
    }
    if (s.x.size() == 1) {
      out << "<circle cx=\"" << fixed2(m.px(s.x[0])) << "\" cy=\"" << fixed2(m.py(s.y[0]))
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      continue;
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fixed2(m.px(s.x[i])) << "," << fixed2(m.py(s.y[i])) << " ";
    out << "\"/>\n";
  }

  bool any_label = false;
  for (const auto& s : series) any_label = any_label || !s.label.empty();
  if (any_label) {
    double ly = kTop + 14.0;
    for (const auto& s : series) {
      const double lx = kWidth - kRight - 150.0;
      out << "<line x1=\"" << fixed2(lx) << "\" y1=\"" << fixed2(ly - 4.0) << "\" x2=\""
          << fixed2(lx + 22.0) << "\" y2=\"" << fixed2(ly - 4.0) << "\" stroke=\"" << s.color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << fixed2(lx + 28.0) << "\" y=\"" << fixed2(ly)
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
      ly += 17.0;
    }
  }

  out << "</svg>\n";
  out.flush();
  if (!out) throw std::runtime_error("write_line_svg: write failed for " + path.string());
}

void write_heatmap_svg(const std::filesystem::path& path,
                       const std::vector<std::vector<double>>& rows, const SvgAxes& axes) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("write_heatmap_svg: empty matrix");
  const std::size_t nr = rows.size();
  const std::size_t nc = rows.front().size();
  double vmin = rows[0][0], vmax = rows[0][0];
  for (const auto& row : rows) {
    if (row.size() != nc) throw std::invalid_argument("write_heatmap_svg: ragged matrix");
    for (double v : row) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  const double span = vmax > vmin ? vmax - vmin : 1.0;

  // leave room for the color bar on the right
  const double plot_right = kRight + 56.0;
  const double pw = kWidth - kLeft - plot_right;
  const double ph = kHeight - kTop - kBottom;
  const double cw = pw / static_cast<double>(nc);
  const double ch = ph / static_cast<double>(nr);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_heatmap_svg: cannot open " + path.string());
  open_svg(out);
  out << "<text x=\"" << fixed2(kLeft + pw / 2.0) << "\" y=\"22\" font-family=\"sans-serif\" "
      << "font-size=\"15\" text-anchor=\"middle\">" << axes.title << "</text>\n";
  out << "<text x=\"" << fixed2(kLeft + pw / 2.0) << "\" y=\"" << fixed2(kHeight - 14.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << axes.x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << fixed2(kTop + ph / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << fixed2(kTop + ph / 2.0) << ")\">" << axes.y_label
      << "</text>\n";

  // row 0 at the bottom, later rows stacked upward
  for (std::size_t i = 0; i < nr; ++i) {
    const double y = kHeight - kBottom - static_cast<double>(i + 1) * ch;
    for (std::size_t j = 0; j < nc; ++j) {
      const double x = kLeft + static_cast<double>(j) * cw;
      const double t = (rows[i][j] - vmin) / span;
      out << "<rect x=\"" << fixed2(x) << "\" y=\"" << fixed2(y) << "\" width=\""
          << fixed2(cw + 0.1) << "\" height=\"" << fixed2(ch + 0.1) << "\" fill=\""
          << ramp_color(vmax > vmin ? t : 0.5) << "\"/>\n";
    }
  }
  out << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\"" << fixed2(pw)
      << "\" height=\"" << fixed2(ph)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";

  const double bx = kWidth - plot_right + 16.0;
  const int bar_cells = 64;
  const double bh = ph / bar_cells;
  for (int i = 0; i < bar_cells; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / bar_cells;
    const double y = kHeight - kBottom - static_cast<double>(i + 1) * bh;
    out << "<rect x=\"" << fixed2(bx) << "\" y=\"" << fixed2(y) << "\" width=\"14\" height=\""
        << fixed2(bh + 0.1) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
  }
  out << "<rect x=\"" << fixed2(bx) << "\" y=\"" << fixed2(kTop) << "\" width=\"14\" height=\""
      << fixed2(ph) << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << fixed2(bx + 18.0) << "\" y=\"" << fixed2(kHeight - kBottom)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << sig4(vmin) << "</text>\n";
  out << "<text x=\"" << fixed2(bx + 18.0) << "\" y=\"" << fixed2(kTop + 10.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << sig4(vmax) << "</text>\n";

  out << "</svg>\n";
  out.flush();
  if (!out) throw std::runtime_error("write_heatmap_svg: write failed for " + path.string());
}

}  // namespace packcool
