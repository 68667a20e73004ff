#pragma once

#include <cmath>
#include <span>

#ifdef __FAST_MATH__
#error "compensated summation is defeated by -ffast-math"
#endif

namespace elasmatch {

/// Neumaier's improved Kahan summation. The running carry is only folded
/// back in when the result is read, so the order of additions fully
/// determines the output bits.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double initial) : sum_(initial) {}

  void add(double value) noexcept {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      carry_ += (sum_ - t) + value;
    } else {
      carry_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double value) noexcept {
    add(value);
    return *this;
  }

  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace elasmatch
