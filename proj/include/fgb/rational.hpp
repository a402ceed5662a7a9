#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "fgb/error.hpp"

namespace fgb {

// Exact arithmetic carrier. All boundary measures are of the form
// integer / (2r (2r-1)^k), so every identity in the library is testable
// with zero residual.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  if (den == 0) throw InvalidParameter("rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline Rat rat(const Int& num, const Int& den) {
  if (den == 0) throw InvalidParameter("rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// base^e for integer e (negative allowed, base != 0 then).
inline Rat rat_pow(const Rat& base, long e) {
  if (e == 0) return rat(1);
  Rat b = base;
  bool neg = e < 0;
  unsigned long k = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  if (neg) {
    if (b == 0) throw InvalidParameter("0 raised to negative power");
    b = rat(Int(b.get_den()), Int(b.get_num()));
  }
  Rat acc = rat(1);
  while (k > 0) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return acc;
}

inline Int int_pow(long base, unsigned long e) {
  Int acc = 1, b = base;
  while (e > 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

inline Rat abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

// Canonical text form: "3", "-1/6", "0".
inline std::string to_string(const Rat& q) { return q.get_str(); }

inline Rat parse_rat(std::string_view text) {
  Rat q;
  if (text.empty() || q.set_str(std::string(text), 10) != 0)
    throw ParseError("bad rational: '" + std::string(text) + "'");
  if (q.get_den() == 0) throw ParseError("rational with zero denominator");
  q.canonicalize();
  return q;
}

}  // namespace fgb
