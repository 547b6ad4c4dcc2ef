#pragma once

// Exact rational arithmetic for the discrete-time formulas (links gmp/gmpxx).

#include <gmpxx.h>

#include <string>

#include "chainfrag/scalar.hpp"

namespace chainfrag {

using Rational = mpq_class;

template <>
struct scalar_traits<mpq_class> {
  static constexpr bool exact = true;
  static double to_double(const mpq_class& x) { return x.get_d(); }

  /// Accepts "p/q", integers and decimals with optional exponent
  /// ("0.125", "1e-3"); decimals are converted exactly.
  static mpq_class from_string(const std::string& s) {
    CHAINFRAG_REQUIRE(!s.empty(), "empty number");
    if (s.find('/') != std::string::npos) {
      mpq_class q;
      CHAINFRAG_REQUIRE(q.set_str(s, 10) == 0, "not a fraction: '" + s + "'");
      CHAINFRAG_REQUIRE(q.get_den() != 0, "zero denominator in '" + s + "'");
      q.canonicalize();
      return q;
    }
    std::string mant = s;
    long exp10 = 0;
    const auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
      mant = s.substr(0, epos);
      try {
        exp10 = std::stol(s.substr(epos + 1));
      } catch (const std::exception&) {
        throw invalid_input("bad exponent in '" + s + "'");
      }
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      neg = mant[0] == '-';
      mant.erase(0, 1);
    }
    const auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exp10 -= static_cast<long>(mant.size() - dot - 1);
    }
    CHAINFRAG_REQUIRE(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos,
                      "not a number: '" + s + "'");
    mpz_class num(digits, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    mpq_class q = exp10 < 0 ? mpq_class(num, scale) : mpq_class(num * scale);
    q.canonicalize();
    return neg ? mpq_class(-q) : q;
  }
};

}  // namespace chainfrag
