#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dgsqp/core/dual.hpp"
#include "dgsqp/tracks/track.hpp"

namespace dgsqp {

// Reference line as (s, e_y, v) samples with linear interpolation in s.
// On closed tracks the interpolation wraps periodically.
class Raceline {
 public:
  Raceline() = default;
  Raceline(std::vector<double> s, std::vector<double> e_y, std::vector<double> v,
           bool closed, double track_length)
      : s_(std::move(s)), ey_(std::move(e_y)), v_(std::move(v)),
        closed_(closed), length_(track_length) {
    validate();
  }

  static Raceline from_csv(const std::string& path, const ParametricTrack& track) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("raceline: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) {
      throw std::runtime_error("raceline: empty file " + path);
    }
    std::vector<double> s, ey, v;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double a, b, c;
      if (!(ls >> a >> b >> c)) {
        throw std::runtime_error("raceline: bad row at " + path + ":" +
                                 std::to_string(lineno));
      }
      s.push_back(a);
      ey.push_back(b);
      v.push_back(c);
    }
    return Raceline(std::move(s), std::move(ey), std::move(v), track.closed(),
                    track.total_length());
  }

  static Raceline centerline(const ParametricTrack& track, double v_const,
                             int samples = 64) {
    std::vector<double> s(samples), ey(samples, 0.0), v(samples, v_const);
    for (int i = 0; i < samples; ++i) {
      s[i] = track.total_length() * i / (samples - 1.0);
    }
    return Raceline(std::move(s), std::move(ey), std::move(v), track.closed(),
                    track.total_length());
  }

  int size() const { return static_cast<int>(s_.size()); }

  template <class S>
  S e_y(const S& s) const { return interp(ey_, s); }
  template <class S>
  S v(const S& s) const { return interp(v_, s); }

 private:
  void validate() const {
    if (s_.size() < 2 || s_.size() != ey_.size() || s_.size() != v_.size()) {
      throw std::runtime_error("raceline: needs >= 2 rows of (s, e_y, v)");
    }
    for (size_t i = 1; i < s_.size(); ++i) {
      if (!(s_[i] > s_[i - 1])) {
        throw std::runtime_error("raceline: s must be strictly increasing");
      }
    }
  }

  // Bracket lookup by value, then an expression linear in s so derivatives
  // pass through (piecewise-linear reference, exact a.e.).
  template <class S>
  S interp(const std::vector<double>& ys, const S& s_query) const {
    S s = s_query;
    if (closed_ && length_ > 0.0) {
      double k = std::floor(ad::value(s) / length_);
      s = s - k * length_;
      // Periodic extension: before the first sample, blend last -> first.
      if (ad::value(s) < s_.front()) {
        double span = s_.front() + length_ - s_.back();
        S t = (s + (length_ - s_.back())) / span;
        return ys.back() + t * (ys.front() - ys.back());
      }
      if (ad::value(s) > s_.back()) {
        double span = s_.front() + length_ - s_.back();
        S t = (s - s_.back()) / span;
        return ys.back() + t * (ys.front() - ys.back());
      }
    }
    double sv = ad::value(s);
    if (sv <= s_.front()) {
      // Clamp: constant extension keeps the reference bounded off the ends.
      return S(ys.front());
    }
    if (sv >= s_.back()) {
      return S(ys.back());
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), sv);
    size_t hi = static_cast<size_t>(it - s_.begin());
    size_t lo = hi - 1;
    S t = (s - s_[lo]) / (s_[hi] - s_[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
  }

  std::vector<double> s_, ey_, v_;
  bool closed_ = false;
  double length_ = 0.0;
};

}  // namespace dgsqp
