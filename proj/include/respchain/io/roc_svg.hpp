#pragma once

// Self-contained SVG of one or more ROC curves on shared axes, with the chance
// diagonal and a legend giving each curve's AUC.

#include <cstdio>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "respchain/diagnostics.hpp"

namespace respchain::io {

struct NamedRoc {
  std::string name;
  RocCurve curve;
};

namespace detail {

inline std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out.push_back(c);
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

} // namespace detail

inline std::string roc_svg(const std::vector<NamedRoc> &curves,
                           const std::string &title = "ROC") {
  constexpr double size = 400, left = 60, top = 40, width = 520, height = 500;
  static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const auto px = [&](double fpr) { return left + fpr * size; };
  const auto py = [&](double tpr) { return top + (1.0 - tpr) * size; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::xml_escape(title) << "</text>\n";

  // Grid, ticks and axes.
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    os << "<line x1=\"" << px(t) << "\" y1=\"" << py(0) << "\" x2=\"" << px(t) << "\" y2=\""
       << py(1) << "\" stroke=\"#eeeeee\"/>\n";
    os << "<line x1=\"" << px(0) << "\" y1=\"" << py(t) << "\" x2=\"" << px(1) << "\" y2=\""
       << py(t) << "\" stroke=\"#eeeeee\"/>\n";
    if (i % 2 == 0) {
      os << "<text x=\"" << px(t) << "\" y=\"" << py(0) + 16
         << "\" text-anchor=\"middle\">" << detail::fixed(t, 1) << "</text>\n";
      os << "<text x=\"" << px(0) - 6 << "\" y=\"" << py(t) + 4
         << "\" text-anchor=\"end\">" << detail::fixed(t, 1) << "</text>\n";
    }
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\""
     << size << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 36
     << "\" text-anchor=\"middle\">1 - specificity</text>\n";
  os << "<text x=\"18\" y=\"" << top + size / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << top + size / 2 << ")\">sensitivity</text>\n";
  os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
     << py(1) << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char *colour = palette[c % std::size(palette)];
    os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colour << "\" points=\"";
    for (std::size_t i = 0; i < curves[c].curve.points.size(); ++i) {
      const auto &p = curves[c].curve.points[i];
      os << (i ? " " : "") << detail::fixed(px(p.false_positive_rate), 3) << ','
         << detail::fixed(py(p.true_positive_rate), 3);
    }
    os << "\"/>\n";
    const double ly = top + size - 18.0 * static_cast<double>(curves.size() - c);
    os << "<line x1=\"" << px(0.55) << "\" y1=\"" << ly << "\" x2=\"" << px(0.62) << "\" y2=\""
       << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(0.64) << "\" y=\"" << ly + 4 << "\">"
       << detail::xml_escape(curves[c].name) << " (AUC " << detail::fixed(curves[c].curve.auc, 3)
       << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace respchain::io
