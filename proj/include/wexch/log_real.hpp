#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace wexch {

// Numerically stable log(exp(a) + exp(b)). Either argument may be -inf.
inline double log_add(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp((a > b ? b : a) - m));
}

// log(exp(a) - exp(b)) for a >= b; returns -inf when a == b.
inline double log_sub(double a, double b) {
    if (std::isinf(b) && b < 0) return a;
    if (b >= a) return -std::numeric_limits<double>::infinity();
    return a + std::log1p(-std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs)
        if (x > m) m = x;
    if (std::isinf(m) && m < 0) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Streaming log-domain accumulator for sums of nonnegative terms.
class LogAccumulator {
  public:
    void add_log(double lg) { lg_ = log_add(lg_, lg); }
    void add_linear(double v) {
        if (v > 0.0) add_log(std::log(v));
    }
    double log_value() const { return lg_; }
    double linear() const { return std::exp(lg_); }
    bool is_zero() const { return std::isinf(lg_) && lg_ < 0; }

  private:
    double lg_ = -std::numeric_limits<double>::infinity();
};

// Nonnegative real stored as (log value, zero flag). The flag makes exact
// zeros explicit instead of leaning on -inf round trips.
struct LogReal {
    double lg = 0.0;
    bool zero = true;

    static LogReal from_log(double lg) { return {lg, false}; }
    static LogReal from_linear(double v) {
        if (v == 0.0) return LogReal{};
        return {std::log(v), false};
    }
    static LogReal zero_value() { return LogReal{}; }
    static LogReal one() { return {0.0, false}; }

    double linear() const { return zero ? 0.0 : std::exp(lg); }
    double log_or_neg_inf() const {
        return zero ? -std::numeric_limits<double>::infinity() : lg;
    }

    friend LogReal operator*(LogReal a, LogReal b) {
        if (a.zero || b.zero) return LogReal{};
        return from_log(a.lg + b.lg);
    }
    friend LogReal operator/(LogReal a, LogReal b) {
        // b must be nonzero; callers guard.
        if (a.zero) return LogReal{};
        return from_log(a.lg - b.lg);
    }
    friend LogReal operator+(LogReal a, LogReal b) {
        if (a.zero) return b;
        if (b.zero) return a;
        return from_log(log_add(a.lg, b.lg));
    }
};

inline LogReal sum(std::span<const LogReal> xs) {
    LogAccumulator acc;
    bool any = false;
    for (const LogReal& x : xs) {
        if (!x.zero) {
            acc.add_log(x.lg);
            any = true;
        }
    }
    if (!any) return LogReal{};
    return LogReal::from_log(acc.log_value());
}

}  // namespace wexch
