#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace roadsentry {

/// Real-valued pixel coordinate, origin top-left, x right, y down.
using PixelPoint = Eigen::Vector2d;

struct FrameDims {
  int width = 0;
  int height = 0;
};

/// Throws std::invalid_argument unless width, height >= 2.
void validate(const FrameDims& dims);

/// A non-negative quantity that may be unbounded (straight lane curvature,
/// headway of a stationary vehicle). Unbounded is a distinct state, not a
/// large finite value.
class Extent {
 public:
  constexpr explicit Extent(double value) noexcept : value_(value), unbounded_(false) {}

  static constexpr Extent unbounded() noexcept { return Extent(); }

  constexpr bool is_unbounded() const noexcept { return unbounded_; }

  double value() const {
    if (unbounded_) throw std::logic_error("value() of an unbounded extent");
    return value_;
  }

  /// Strictly below a finite threshold; unbounded is never below anything.
  constexpr bool below(double threshold) const noexcept { return !unbounded_ && value_ < threshold; }

  friend constexpr bool operator==(const Extent& a, const Extent& b) noexcept {
    return a.unbounded_ == b.unbounded_ && (a.unbounded_ || a.value_ == b.value_);
  }

 private:
  constexpr Extent() noexcept : value_(0.0), unbounded_(true) {}

  double value_;
  bool unbounded_;
};

}  // namespace roadsentry
