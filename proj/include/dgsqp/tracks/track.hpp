#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dgsqp/core/dual.hpp"
#include "dgsqp/core/errors.hpp"

namespace dgsqp {

// Wraps an angle to (-pi, pi].
inline double wrap_to_pi(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

struct TrackSegment {
  double s0 = 0.0;      // start arclength
  double length = 0.0;  // arclength extent
  double kappa = 0.0;   // 0 on straights, sign(sweep)/radius on arcs
  double x0 = 0.0;      // start pose
  double y0 = 0.0;
  double phi0 = 0.0;    // unwrapped heading at s0
  double w_left = 0.0;  // lateral bounds, both > 0
  double w_right = 0.0;
};

struct FrenetPose {
  double s = 0.0;
  double e_y = 0.0;
  double e_psi = 0.0;
  bool ambiguous = false;
};

// Piecewise straight/arc centerline under arclength parameterization, so
// tau, Phi, kappa are closed-form per segment and ||tau'|| = 1 exactly.
// Segment intervals are half-open [s0, s0 + length); the final segment owns
// s = L. Queries outside [0, L] wrap for closed tracks and extrapolate the
// boundary segment's geometry for open ones.
class ParametricTrack {
 public:
  ParametricTrack() = default;

  static ParametricTrack from_json(const nlohmann::json& j);
  static ParametricTrack from_json_file(const std::string& path);

  double total_length() const { return length_; }
  bool closed() const { return closed_; }
  const std::string& name() const { return name_; }
  const std::vector<TrackSegment>& segments() const { return segments_; }

  // Progress wrapped into [0, L) for closed tracks; identity otherwise.
  // The shift is by a constant multiple of L, so derivatives pass through.
  template <class S>
  S wrap_progress(const S& s) const {
    if (!closed_) return s;
    double k = std::floor(ad::value(s) / length_);
    return s - k * length_;
  }

  template <class S>
  void position(const S& s, S& x, S& y) const {
    using std::cos;
    using std::sin;
    S sw = wrap_progress(s);
    const TrackSegment& g = segment_at(ad::value(sw));
    S ds = sw - g.s0;
    if (g.kappa == 0.0) {
      x = g.x0 + ds * std::cos(g.phi0);
      y = g.y0 + ds * std::sin(g.phi0);
    } else {
      S phi = g.phi0 + g.kappa * ds;
      x = g.x0 + (sin(phi) - std::sin(g.phi0)) / g.kappa;
      y = g.y0 - (cos(phi) - std::cos(g.phi0)) / g.kappa;
    }
  }

  // Tangent angle Phi(s); continuous and unwrapped along the segment chain.
  template <class S>
  S heading(const S& s) const {
    S sw = wrap_progress(s);
    const TrackSegment& g = segment_at(ad::value(sw));
    return g.phi0 + g.kappa * (sw - g.s0);
  }

  template <class S>
  S curvature(const S& s) const {
    return S(segment_at(ad::value(wrap_progress(s))).kappa);
  }

  template <class S>
  S width_left(const S& s) const {
    return S(segment_at(ad::value(wrap_progress(s))).w_left);
  }

  template <class S>
  S width_right(const S& s) const {
    return S(segment_at(ad::value(wrap_progress(s))).w_right);
  }

  void frenet_to_inertial(double s, double e_y, double& x, double& y) const {
    double phi = heading(s);
    double cx, cy;
    position(s, cx, cy);
    x = cx - e_y * std::sin(phi);
    y = cy + e_y * std::cos(phi);
  }

  // Global projection: closed-form per-segment minimizers of ||tau(sigma)-p||
  // compared across all segments. Near-ties (within 1e-9 in distance) between
  // genuinely different arclengths resolve to the smaller s with the
  // ambiguous flag set; junction points shared by adjacent segments are not
  // ambiguous since they agree in s.
  FrenetPose frenet_pose(double px, double py, double psi) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    bool ambiguous = false;
    for (const TrackSegment& g : segments_) {
      auto [sig, dist] = project_segment(g, px, py);
      if (dist < best_d - 1e-9) {
        best_d = dist;
        best_s = sig;
        ambiguous = false;
      } else if (dist <= best_d + 1e-9) {
        if (progress_gap(sig, best_s) > 1e-9) ambiguous = true;
        if (sig < best_s) best_s = sig;
      }
    }
    FrenetPose out;
    out.s = closed_ ? wrap_progress(best_s) : best_s;
    double phi = heading(out.s);
    double cx, cy;
    position(out.s, cx, cy);
    out.e_y = -(px - cx) * std::sin(phi) + (py - cy) * std::cos(phi);
    out.e_psi = wrap_to_pi(psi - phi);
    out.ambiguous = ambiguous;
    return out;
  }

 private:
  const TrackSegment& segment_at(double s) const {
    if (s < segments_.front().s0) return segments_.front();
    // Last segment whose start is <= s; the final segment owns s >= L.
    auto it = std::upper_bound(
        segments_.begin(), segments_.end(), s,
        [](double v, const TrackSegment& g) { return v < g.s0; });
    return *std::prev(it);
  }

  double progress_gap(double a, double b) const {
    double d = std::abs(a - b);
    if (closed_) d = std::min(d, length_ - d);
    return d;
  }

  // Returns (arclength, distance) of the closest centerline point of g.
  std::pair<double, double> project_segment(const TrackSegment& g, double px,
                                            double py) const {
    auto dist_at = [&](double s) {
      double x, y;
      position(s, x, y);
      return std::hypot(px - x, py - y);
    };
    if (g.kappa == 0.0) {
      double t = (px - g.x0) * std::cos(g.phi0) + (py - g.y0) * std::sin(g.phi0);
      double s = g.s0 + std::clamp(t, 0.0, g.length);
      return {s, dist_at(s)};
    }
    double cx = g.x0 - std::sin(g.phi0) / g.kappa;
    double cy = g.y0 + std::cos(g.phi0) / g.kappa;
    double dx = px - cx, dy = py - cy;
    double best_s = g.s0;
    double best_d = dist_at(best_s);
    if (std::hypot(dx, dy) > 1e-12) {
      // Interior candidate: heading at the closest circle point differs from
      // the center-to-point angle by +-pi/2 depending on turn direction.
      double theta = std::atan2(dy, dx);
      double phi_t = theta + (g.kappa > 0.0 ? 0.5 * M_PI : -0.5 * M_PI);
      double period = 2.0 * M_PI / std::abs(g.kappa);
      double dl = (phi_t - g.phi0) / g.kappa;
      dl -= period * std::floor(dl / period);
      if (dl <= g.length) {
        double s = g.s0 + dl;
        double d = dist_at(s);
        if (d < best_d) {
          best_d = d;
          best_s = s;
        }
      }
    }
    double d_end = dist_at(g.s0 + g.length);
    if (d_end < best_d) {
      best_d = d_end;
      best_s = g.s0 + g.length;
    }
    return {best_s, best_d};
  }

  std::string name_;
  std::vector<TrackSegment> segments_;
  double length_ = 0.0;
  bool closed_ = false;
};

inline ParametricTrack ParametricTrack::from_json(const nlohmann::json& j) {
  ParametricTrack t;
  t.name_ = j.value("name", std::string("track"));
  t.closed_ = j.value("closed", false);
  double wl_default = j.value("width_left", 0.0);
  double wr_default = j.value("width_right", 0.0);
  double x = 0.0, y = 0.0, phi = 0.0;
  if (j.contains("start_pose")) {
    const auto& p = j.at("start_pose");
    x = p.at(0).get<double>();
    y = p.at(1).get<double>();
    phi = p.at(2).get<double>();
  }
  double x_start = x, y_start = y, phi_start = phi;
  if (!j.contains("segments") || !j.at("segments").is_array() ||
      j.at("segments").empty()) {
    throw std::runtime_error("track: needs a non-empty segments array");
  }
  double s = 0.0;
  for (const auto& js : j.at("segments")) {
    TrackSegment g;
    g.s0 = s;
    g.x0 = x;
    g.y0 = y;
    g.phi0 = phi;
    g.w_left = js.value("width_left", wl_default);
    g.w_right = js.value("width_right", wr_default);
    if (!(g.w_left > 0.0) || !(g.w_right > 0.0)) {
      throw std::runtime_error("track: widths must be strictly positive");
    }
    std::string type = js.at("type").get<std::string>();
    if (type == "straight") {
      g.length = js.at("length").get<double>();
      if (!(g.length > 0.0)) {
        throw std::runtime_error("track: straight length must be positive");
      }
      g.kappa = 0.0;
      x += g.length * std::cos(phi);
      y += g.length * std::sin(phi);
    } else if (type == "arc") {
      double radius = js.at("radius").get<double>();
      double sweep = js.at("sweep_deg").get<double>() * M_PI / 180.0;
      if (!(radius > 0.0) || sweep == 0.0) {
        throw std::runtime_error(
            "track: arc needs positive radius and nonzero sweep_deg");
      }
      g.kappa = (sweep > 0.0 ? 1.0 : -1.0) / radius;
      g.length = std::abs(sweep) * radius;
      double phi_end = phi + sweep;
      x += (std::sin(phi_end) - std::sin(phi)) / g.kappa;
      y -= (std::cos(phi_end) - std::cos(phi)) / g.kappa;
      phi = phi_end;
    } else {
      throw std::runtime_error("track: unknown segment type '" + type + "'");
    }
    s += g.length;
    t.segments_.push_back(g);
  }
  t.length_ = s;
  if (t.closed_) {
    double gap = std::hypot(x - x_start, y - y_start);
    double dphi = std::abs(wrap_to_pi(phi - phi_start));
    if (gap > 1e-6 || dphi > 1e-6) {
      std::ostringstream os;
      os << "track: closed flag set but endpoint misses start by " << gap
         << " m / " << dphi << " rad";
      throw std::runtime_error(os.str());
    }
  }
  return t;
}

inline ParametricTrack ParametricTrack::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("track: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace dgsqp
