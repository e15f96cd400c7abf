#pragma once
/* Exact arithmetic: arbitrary-precision integers and rationals, the mod-1
   reduction used for circle-valued data, and the canonical "a/b" string
   form used by all serialization. */

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "errors.hpp"

namespace gerbecalc {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int num(const Rat& q) { return boost::multiprecision::numerator(q); }
inline Int den(const Rat& q) { return boost::multiprecision::denominator(q); }

/* Floor division a/b for b > 0 (cpp_int division truncates toward zero). */
inline Int floor_div(const Int& a, const Int& b) {
  Int q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

inline Int floor_rat(const Rat& q) { return floor_div(num(q), den(q)); }

inline bool is_integer(const Rat& q) { return den(q) == 1; }

/* Representative of q mod Z in [0, 1). */
inline Rat mod1(const Rat& q) { return q - Rat(floor_rat(q)); }

/* Canonical string "a/b", lowest terms, b >= 1 always (e.g. "0/1", "-3/2"). */
inline std::string rat_to_string(const Rat& q) {
  return num(q).str() + "/" + den(q).str();
}

inline bool parse_int_strict(const std::string& s, Int& out) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') return false;
  out = Int(s);
  return true;
}

/* Parse "a" or "a/b"; any malformation or b == 0 raises IOError tagged with
   the caller-supplied location path. */
inline Rat rat_from_string(const std::string& s, const std::string& where) {
  size_t slash = s.find('/');
  Int a, b = 1;
  if (slash == std::string::npos) {
    if (!parse_int_strict(s, a))
      throw IOError("malformed rational '" + s + "'", where);
  } else {
    if (!parse_int_strict(s.substr(0, slash), a) ||
        !parse_int_strict(s.substr(slash + 1), b))
      throw IOError("malformed rational '" + s + "'", where);
    if (b == 0) throw IOError("zero denominator in '" + s + "'", where);
  }
  return Rat(a, b);
}

inline Int lcm_int(const Int& a, const Int& b) {
  if (a == 0 || b == 0) return 0;
  return boost::multiprecision::abs(a / boost::multiprecision::gcd(a, b) * b);
}

/* Least common multiple of denominators; 1 for an empty range. */
template <typename It>
Int common_denominator(It first, It last) {
  Int l = 1;
  for (; first != last; ++first) l = lcm_int(l, den(*first));
  return l;
}

}  // namespace gerbecalc
