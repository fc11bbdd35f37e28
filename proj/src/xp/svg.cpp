#include "xp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hdd::xp {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
  void pad() {
    if (empty()) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double d = std::max(1.0, std::abs(hi)) * 0.5;
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
  };
  Range xr;
  Range yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
      if (i < s.band.size() && std::isfinite(s.band[i])) {
        if (!spec.log_y || s.y[i] - s.band[i] > 0.0) yr.add(ty(s.y[i] - s.band[i]));
        yr.add(ty(s.y[i] + s.band[i]));
      }
    }
  }
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double yt) { return kTop + ph - (yt - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 16)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\">" << tick_label(spec.log_y ? std::pow(10.0, yv) : yv)
      << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
    << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << num(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label)
    << (spec.log_y ? " (log)" : "") << "</text>\n";

  for (const auto& [x, label] : spec.markers) {
    if (!(x >= xr.lo && x <= xr.hi)) continue;
    o << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(x))
      << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    o << "<text x=\"" << num(px(x) + 3) << "\" y=\"" << num(kTop + 12) << "\" fill=\"gray\">"
      << escape(label) << "</text>\n";
  }

  int legend = 0;
  for (const auto& s : series) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (usable(s.x[i], s.y[i])) idx.push_back(i);
    }
    if (!s.band.empty() && idx.size() > 1) {
      std::ostringstream up;
      std::ostringstream down;
      for (std::size_t i : idx) {
        const double b = i < s.band.size() && std::isfinite(s.band[i]) ? s.band[i] : 0.0;
        double lo = s.y[i] - b;
        if (spec.log_y && lo <= 0.0) lo = s.y[i];
        up << num(px(s.x[i])) << "," << num(py(ty(s.y[i] + b))) << " ";
        down.str(num(px(s.x[i])) + "," + num(py(ty(lo))) + " " + down.str());
      }
      o << "<polygon points=\"" << up.str() << down.str() << "\" fill=\"" << s.color
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    if (idx.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i : idx) o << num(px(s.x[i])) << "," << num(py(ty(s.y[i]))) << " ";
      o << "\"/>\n";
    }
    for (std::size_t i : idx) {
      o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(ty(s.y[i])))
        << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    const double ly = kTop + 16 + 16 * legend++;
    o << "<line x1=\"" << num(kLeft + pw - 150) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(kLeft + pw - 130) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(kLeft + pw - 125) << "\" y=\"" << num(ly) << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace hdd::xp
