#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrm/driver.hpp"
#include "qrm/error.hpp"

namespace qrm {

LCurveResult l_curve(std::vector<LCurvePoint> points, double flat_degrees) {
  if (points.size() < 5) throw InvalidArgument("l_curve: need at least 5 points");
  for (const auto& p : points) {
    if (!(p.delta > 0.0) || !(p.norm_f > 0.0) || !(p.norm_e > 0.0)) {
      throw InvalidArgument("l_curve: delta and both norms must be positive");
    }
  }
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });

  LCurveResult out;
  out.curve = std::move(points);
  const std::size_t n = out.curve.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(out.curve[i].norm_f);
    y[i] = std::log(out.curve[i].norm_e);
  }
  out.angles.assign(n, std::numeric_limits<double>::quiet_NaN());

  // Side of the chord A->B facing the lower-left of the bounding box.
  const double ax = x.front(), ay = y.front(), bx = x.back(), by = y.back();
  const double cx = bx - ax, cy = by - ay;
  const double qx = *std::min_element(x.begin(), x.end()) - 1.0;
  const double qy = *std::min_element(y.begin(), y.end()) - 1.0;
  const double q_side = cx * (qy - ay) - cy * (qx - ax);
  const double chord = std::hypot(cx, cy);

  double best = flat_degrees;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double ux = ax - x[i], uy = ay - y[i];
    const double vx = bx - x[i], vy = by - y[i];
    const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
    if (nu == 0.0 || nv == 0.0) continue;
    const double c = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
    const double angle = std::acos(c) * 180.0 / std::numbers::pi;
    out.angles[i] = angle;
    const double side = cx * (y[i] - ay) - cy * (x[i] - ax);
    if (chord == 0.0 || side * q_side <= 0.0) continue;
    // Points run from large to small delta, so a strict comparison keeps
    // the larger delta on ties.
    if (angle < best) {
      best = angle;
      out.corner = i;
    }
  }
  out.degenerate = !out.corner.has_value();
  return out;
}

}  // namespace qrm
