#include <algorithm>
#include <cstdio>
#include <string>

#include "commands.hpp"

namespace viris::cli {

namespace {

constexpr double kLo = 1e-4, kHi = 0.5;
constexpr double kSize = 420, kPad = 60;

double axis(double p) {
  const double lo = probit(kLo), hi = probit(kHi);
  return (probit(std::clamp(p, kLo, kHi)) - lo) / (hi - lo);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string det_svg(const VerificationReport& r) {
  const double total = kSize + 2 * kPad;
  auto px = [](double fmr) { return kPad + axis(fmr) * kSize; };
  auto py = [](double fnmr) { return kPad + (1.0 - axis(fnmr)) * kSize; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total) + "\" height=\"" + num(total) +
       "\" viewBox=\"0 0 " + num(total) + " " + num(total) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(total) + "\" height=\"" + num(total) + "\" fill=\"white\"/>\n";
  s += "<rect x=\"" + num(kPad) + "\" y=\"" + num(kPad) + "\" width=\"" + num(kSize) + "\" height=\"" + num(kSize) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  const std::pair<double, const char*> ticks[] = {{1e-4, "0.01"}, {1e-3, "0.1"}, {1e-2, "1"},
                                                  {5e-2, "5"},    {0.2, "20"},   {0.5, "50"}};
  for (const auto& [p, label] : ticks) {
    const double x = px(p), y = py(p);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kPad) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kPad + kSize) +
         "\" stroke=\"#ddd\"/>\n";
    s += "<line x1=\"" + num(kPad) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kPad + kSize) + "\" y2=\"" + num(y) +
         "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kPad + kSize + 16) + "\" text-anchor=\"middle\">" + label + "</text>\n";
    s += "<text x=\"" + num(kPad - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  s += "<text x=\"" + num(kPad + kSize / 2) + "\" y=\"" + num(total - 14) +
       "\" text-anchor=\"middle\">False match rate (%)</text>\n";
  s += "<text transform=\"translate(16 " + num(kPad + kSize / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">False non-match rate (%)</text>\n";
  s += "<line x1=\"" + num(px(kLo)) + "\" y1=\"" + num(py(kLo)) + "\" x2=\"" + num(px(kHi)) + "\" y2=\"" +
       num(py(kHi)) + "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";

  s += "<polyline id=\"det-curve\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < r.det_points.size(); ++i) {
    if (i) s += " ";
    s += num(px(r.det_points[i].fmr)) + "," + num(py(r.det_points[i].fnmr));
  }
  s += "\"/>\n";
  s += "<circle id=\"eer-marker\" cx=\"" + num(px(r.eer)) + "\" cy=\"" + num(py(r.eer)) +
       "\" r=\"4\" fill=\"#c0392b\"/>\n";
  char title[96];
  std::snprintf(title, sizeof title, "DET (EER %.3f%%)", 100.0 * r.eer);
  s += "<text x=\"" + num(kPad + kSize / 2) + "\" y=\"" + num(kPad - 20) + "\" text-anchor=\"middle\" font-size=\"14\">" +
       title + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace viris::cli
