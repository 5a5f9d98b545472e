#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace matpred {

// Streaming estimate of log(mean(exp(l_i))) with a delta-method standard
// error. +inf terms (prior poles) are counted in `poles()` and excluded.
class LogMeanExp {
 public:
  void add(double log_w) {
    if (log_w == std::numeric_limits<double>::infinity()) {
      ++poles_;
      return;
    }
    ++count_;
    if (log_w == -std::numeric_limits<double>::infinity()) return;
    if (log_w > shift_) {
      const double scale = std::exp(shift_ - log_w);
      sum_ *= scale;
      sum_sq_ *= scale * scale;
      shift_ = log_w;
    }
    const double w = std::exp(log_w - shift_);
    sum_ += w;
    sum_sq_ += w * w;
  }

  long count() const { return count_; }
  long poles() const { return poles_; }
  bool degenerate() const { return count_ == 0 || sum_ == 0.0; }

  double log_mean() const { return shift_ + std::log(sum_ / static_cast<double>(count_)); }

  double std_err_log() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double mean = sum_ / n;
    const double var = std::max(0.0, sum_sq_ / n - mean * mean) * n / (n - 1.0);
    return std::sqrt(var / n) / mean;
  }

 private:
  long count_ = 0;
  long poles_ = 0;
  double shift_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

}  // namespace matpred
