#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace trustcf {

// Legal rating values: r_min, r_min + step, ..., r_max.
class RatingDomain {
 public:
  RatingDomain(double r_min, double r_max, double step) : r_min_(r_min), r_max_(r_max), step_(step) {
    if (!(std::isfinite(r_min) && std::isfinite(r_max) && std::isfinite(step)))
      throw std::invalid_argument("rating domain bounds must be finite");
    if (!(r_min < r_max)) throw std::invalid_argument("rating domain requires r_min < r_max");
    if (!(step > 0)) throw std::invalid_argument("rating domain requires step > 0");
    const double n = (r_max - r_min) / step;
    if (std::abs(n - std::round(n)) > 1e-9)
      throw std::invalid_argument("rating domain span is not a multiple of step");
  }

  static RatingDomain epinions() { return {1.0, 5.0, 1.0}; }
  static RatingDomain filmtrust() { return {0.5, 4.0, 0.5}; }

  double min() const noexcept { return r_min_; }
  double max() const noexcept { return r_max_; }
  double step() const noexcept { return step_; }
  double span() const noexcept { return r_max_ - r_min_; }

  // Number of distinct absolute differences between two legal rates.
  std::size_t difference_levels() const noexcept {
    return static_cast<std::size_t>(std::llround(span() / step_)) + 1;
  }

  bool contains(double r) const noexcept { return r >= r_min_ && r <= r_max_; }

  bool on_grid(double r) const noexcept {
    const double k = (r - r_min_) / step_;
    return std::abs(k - std::round(k)) <= 1e-9;
  }

  bool is_legal(double r) const noexcept { return std::isfinite(r) && contains(r) && on_grid(r); }

  std::string to_string() const {
    return "[" + format(r_min_) + "," + format(r_max_) + "] step " + format(step_);
  }

  friend bool operator==(const RatingDomain&, const RatingDomain&) = default;

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  double r_min_;
  double r_max_;
  double step_;
};

}  // namespace trustcf
