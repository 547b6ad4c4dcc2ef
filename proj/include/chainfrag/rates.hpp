#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "chainfrag/links.hpp"
#include "chainfrag/scalar.hpp"

namespace chainfrag {

enum class TimeMode { discrete, continuous };

inline const char* to_string(TimeMode m) { return m == TimeMode::discrete ? "discrete" : "continuous"; }

/// Per-link removal probabilities (discrete time) or rates (continuous
/// time). Discrete: every rho > 0 and the total is at most 1. Continuous:
/// every rho > 0.
template <class T>
class RateSpec {
 public:
  RateSpec(TimeMode mode, std::vector<T> rho) : mode_(mode), rho_(std::move(rho)) {
    CHAINFRAG_REQUIRE(!rho_.empty() && rho_.size() <= static_cast<std::size_t>(kMaxLinks),
                      "number of links must lie in [1, 64]");
    for (std::size_t i = 0; i < rho_.size(); ++i)
      CHAINFRAG_REQUIRE(rho_[i] > T(0), "rate of link " + std::to_string(i + 1) + " must be positive");
    if (mode_ == TimeMode::discrete)
      CHAINFRAG_REQUIRE(total() <= T(1), "discrete removal probabilities must sum to at most 1");
  }

  static RateSpec discrete(std::vector<T> rho) { return RateSpec(TimeMode::discrete, std::move(rho)); }
  static RateSpec continuous(std::vector<T> rho) { return RateSpec(TimeMode::continuous, std::move(rho)); }

  TimeMode mode() const noexcept { return mode_; }
  int n() const noexcept { return static_cast<int>(rho_.size()); }
  LinkSet links() const { return LinkSet(n()); }

  /// rho of link alpha (1-based).
  const T& operator[](int alpha) const { return rho_.at(static_cast<std::size_t>(alpha - 1)); }
  const std::vector<T>& values() const noexcept { return rho_; }

  /// Sum of rho over a set of links; rho of the empty set is 0.
  T of(Mask m) const {
    T s(0);
    for_each_bit(m, [&](int i) { s += rho_[static_cast<std::size_t>(i)]; });
    return s;
  }
  T of(const Fragment& f) const {
    T s(0);
    for (int a = f.lo(); a <= f.hi(); ++a) s += rho_[static_cast<std::size_t>(a - 1)];
    return s;
  }
  T total() const { return of(low_bits(n())); }

  void require(TimeMode m) const {
    CHAINFRAG_REQUIRE(mode_ == m, std::string("operation needs ") + to_string(m) + "-time rates");
  }

 private:
  TimeMode mode_;
  std::vector<T> rho_;
};

/// Converts between number types through their text form (exact for
/// decimal input when the target is rational).
template <class To, class From>
RateSpec<To> convert_rates(const RateSpec<From>& r) {
  std::vector<To> v;
  for (const auto& x : r.values()) {
    if constexpr (std::is_same_v<From, double>)
      v.push_back(scalar_traits<To>::from_string(shortest_decimal(x)));
    else
      v.push_back(scalar_traits<To>::from_string(x.get_str()));
  }
  return RateSpec<To>(r.mode(), std::move(v));
}

}  // namespace chainfrag
