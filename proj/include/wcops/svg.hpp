// Copyright 2026 The wcops Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal SVG emitters for metric curves and simplex trajectories.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wcops::svg {

struct Series {
  std::string label;
  std::vector<double> x, mean, low, high;
};

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[k % 6];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

/// Line chart with shaded confidence bands; at most `max_points` per series.
inline std::string line_chart(const std::string& title, const std::string& ylabel,
                              const std::vector<Series>& series, std::size_t max_points = 400) {
  const double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.low[k]) || !std::isfinite(s.high[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.low[k]);
      ymax = std::max(ymax, s.high[k]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1, ymin -= 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
  auto Y = [&](double v) { return H - bottom - (v - ymin) / (ymax - ymin) * (H - top - bottom); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(W / 2 - right / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
    << "\" height=\"" << H - top - bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.3g", yv);
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << lab
      << "</text>\n";
    std::snprintf(lab, sizeof lab, "%.0f", xv);
    o << "<text x=\"" << num(X(xv)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">"
      << lab << "</text>\n";
  }
  if (ymin < 0 && ymax > 0)
    o << "<line x1=\"" << left << "\" x2=\"" << W - right << "\" y1=\"" << num(Y(0)) << "\" y2=\""
      << num(Y(0)) << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
  o << "<text x=\"" << num(left + (W - left - right) / 2) << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\">episode</text>\n";
  o << "<text transform=\"translate(16," << num(top + (H - top - bottom) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& S = series[s];
    const std::size_t n = S.x.size();
    if (n == 0) continue;
    const std::size_t stride = std::max<std::size_t>(1, n / max_points);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    std::ostringstream band, line;
    for (std::size_t k : idx)
      if (std::isfinite(S.high[k])) band << num(X(S.x[k])) << "," << num(Y(S.high[k])) << " ";
    for (auto it = idx.rbegin(); it != idx.rend(); ++it)
      if (std::isfinite(S.low[*it])) band << num(X(S.x[*it])) << "," << num(Y(S.low[*it])) << " ";
    for (std::size_t k : idx)
      if (std::isfinite(S.mean[k])) line << num(X(S.x[k])) << "," << num(Y(S.mean[k])) << " ";
    o << "<polygon points=\"" << band.str() << "\" fill=\"" << palette(s)
      << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    o << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << palette(s)
      << "\" stroke-width=\"1.8\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << W - right + 12 << "\" x2=\"" << W - right + 32 << "\" y1=\"" << ly
      << "\" y2=\"" << ly << "\" stroke=\"" << palette(s) << "\" stroke-width=\"3\"/>\n";
    o << "<text x=\"" << W - right + 38 << "\" y=\"" << ly + 4 << "\">" << escape(S.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

using Bary = std::array<double, 3>;

/// Clips a polygon given in barycentric coordinates to {b : c . b <= 0}.
inline std::vector<Bary> clip_halfplane(const std::vector<Bary>& poly, const Bary& c) {
  std::vector<Bary> out;
  auto f = [&](const Bary& b) { return c[0] * b[0] + c[1] * b[1] + c[2] * b[2]; };
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Bary& a = poly[k];
    const Bary& b = poly[(k + 1) % poly.size()];
    const double fa = f(a), fb = f(b);
    if (fa <= 0) out.push_back(a);
    if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) {
      const double s = fa / (fa - fb);
      out.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])});
    }
  }
  return out;
}

struct SimplexPlot {
  std::vector<Bary> constraints;  // safe region is {b : c_i . b <= 0}
  Bary reward{};                  // shading marks the highest-reward vertex
  std::vector<std::pair<std::string, std::vector<Bary>>> trajectories;
  std::optional<Bary> optimum;
};

/// Vertex k of the triangle in drawing coordinates.
inline std::array<double, 2> simplex_point(const Bary& b) {
  const double x0 = 60, y0 = 440, side = 440;
  const std::array<std::array<double, 2>, 3> v{{{x0, y0}, {x0 + side, y0}, {x0 + side / 2, y0 - side * std::sqrt(3.0) / 2}}};
  return {b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0],
          b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1]};
}

inline std::string simplex_chart(const std::string& title, const SimplexPlot& plot) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"500\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"280\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  auto poly_points = [&](const std::vector<Bary>& poly) {
    std::ostringstream p;
    for (const auto& b : poly) {
      const auto xy = simplex_point(b);
      p << num(xy[0]) << "," << num(xy[1]) << " ";
    }
    return p.str();
  };
  const std::vector<Bary> tri{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  o << "<polygon points=\"" << poly_points(tri) << "\" fill=\"#f7f7f7\" stroke=\"#444\"/>\n";

  // Optimal action: the corner cell closest to the best vertex.
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(plot.reward.begin(), plot.reward.end()) - plot.reward.begin());
  std::vector<Bary> corner{tri[best]};
  for (std::size_t k = 0; k < 3; ++k) {
    if (k == best) continue;
    Bary b{};
    b[best] = 0.75;
    b[k] = 0.25;
    corner.push_back(b);
  }
  o << "<polygon points=\"" << poly_points(corner) << "\" fill=\"#1f77b4\" fill-opacity=\"0.25\"/>\n";

  std::vector<Bary> safe = tri;
  for (const auto& c : plot.constraints) safe = clip_halfplane(safe, c);
  if (safe.size() >= 3)
    o << "<polygon points=\"" << poly_points(safe)
      << "\" fill=\"#d62728\" fill-opacity=\"0.3\" stroke=\"#d62728\"/>\n";

  for (std::size_t s = 0; s < plot.trajectories.size(); ++s) {
    const auto& traj = plot.trajectories[s].second;
    if (traj.empty()) continue;
    o << "<polyline points=\"" << poly_points(traj) << "\" fill=\"none\" stroke=\"" << palette(s)
      << "\" stroke-width=\"1.2\"/>\n";
    const auto end = simplex_point(traj.back());
    o << "<circle cx=\"" << num(end[0]) << "\" cy=\"" << num(end[1]) << "\" r=\"4\" fill=\""
      << palette(s) << "\"/>\n";
    o << "<text x=\"560\" y=\"" << 60 + 18 * s << "\" fill=\"" << palette(s) << "\">"
      << escape(plot.trajectories[s].first) << "</text>\n";
  }
  if (plot.optimum) {
    const auto xy = simplex_point(*plot.optimum);
    o << "<path d=\"M" << num(xy[0] - 5) << "," << num(xy[1] - 5) << " L" << num(xy[0] + 5) << ","
      << num(xy[1] + 5) << " M" << num(xy[0] - 5) << "," << num(xy[1] + 5) << " L"
      << num(xy[0] + 5) << "," << num(xy[1] - 5) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  const char* names[] = {"a0", "a1", "a2"};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto xy = simplex_point(tri[k]);
    o << "<text x=\"" << num(xy[0]) << "\" y=\"" << num(xy[1] + (k == 2 ? -8 : 18))
      << "\" text-anchor=\"middle\">" << names[k] << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace wcops::svg
