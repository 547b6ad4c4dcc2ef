#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <system_error>

#include "chainfrag/error.hpp"

namespace chainfrag {

/// Customisation point for the number types the exact formulas run on.
/// `double` is provided here; chainfrag/rational.hpp adds mpq_class.
template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double to_double(double x) noexcept { return x; }
  /// Accepts a decimal ("0.125", "1e-3") or a fraction ("1/8").
  static double from_string(const std::string& s) {
    const auto slash = s.find('/');
    if (slash != std::string::npos) return from_string(s.substr(0, slash)) / from_string(s.substr(slash + 1));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    CHAINFRAG_REQUIRE(!s.empty() && end == s.c_str() + s.size(), "not a number: '" + s + "'");
    return v;
  }
};

template <class T>
double to_double(const T& x) {
  return scalar_traits<T>::to_double(x);
}

/// Shortest decimal text that round-trips the double, e.g. 0.1 -> "0.1".
inline std::string shortest_decimal(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  if (r.ec != std::errc{}) throw consistency_error("to_chars failed");
  return std::string(buf, r.ptr);
}

/// base^t with 0^0 = 1.
template <class T>
T ipow(T base, long long t) {
  T result(1);
  while (t > 0) {
    if (t & 1) result *= base;
    t >>= 1;
    if (t > 0) base *= base;
  }
  return result;
}

/// Running sum. Exact types add directly; double uses Neumaier's
/// compensated summation.
template <class T>
class Accumulator {
 public:
  void add(const T& x) { sum_ += x; }
  T value() const { return sum_; }

 private:
  T sum_{0};
};

template <>
class Accumulator<double> {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace chainfrag
