#pragma once
/* Error taxonomy.  Every failure mode of the library maps onto one of these
   types; CLI exit codes are derived from them (validation 1, obstruction 2,
   I/O 3). */

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gerbecalc {

/* A simplex is a strictly increasing tuple of vertex ids. */
using Simplex = std::vector<int>;

inline std::string simplex_str(const Simplex& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/* Malformed inputs: bad complexes, mismatched complexes, invalid data. */
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/* Degree out of range for the requested operation. */
class DegreeError : public Error {
 public:
  explicit DegreeError(const std::string& msg) : Error(msg) {}
};

/* A referenced simplex is not present in the complex. */
class MissingSimplexError : public Error {
 public:
  MissingSimplexError(const std::string& msg, Simplex missing)
      : Error(msg + " " + simplex_str(missing)), simplex(std::move(missing)) {}
  Simplex simplex;
};

/* A cochain expected to be closed is not; carries the first offending
   simplex in lexicographic order. */
class NotClosedError : public Error {
 public:
  NotClosedError(const std::string& msg, Simplex offender)
      : Error(msg + " at " + simplex_str(offender)),
        simplex(std::move(offender)) {}
  Simplex simplex;
};

/* A cohomological obstruction blocks the operation.  Coordinates of the
   obstructing class are carried as (label, value) pairs, labels like
   "Z[0]" for free coordinates and "Z_2[0]" for torsion coordinates. */
class ObstructionError : public Error {
 public:
  ObstructionError(const std::string& msg,
                   std::vector<std::pair<std::string, std::string>> c)
      : Error(msg), coords(std::move(c)) {}
  std::vector<std::pair<std::string, std::string>> coords;
};

/* The input is valid but outside the supported fragment. */
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

/* Parse/serialize failures; path is a JSON-pointer-style location. */
class IOError : public Error {
 public:
  IOError(const std::string& msg, std::string where)
      : Error(msg + " (at " + where + ")"), path(std::move(where)) {}
  std::string path;
};

}  // namespace gerbecalc
