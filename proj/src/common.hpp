#pragma once

#include <complex>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace ps {

using complexd = std::complex<double>;

// Error taxonomy shared with the C API (see include/pointersieve.h).
enum class status : int {
  ok = 0,
  invalid_argument = 1,
  dimension = 2,
  state_invalid = 3,
  truncation = 4,
  step_size = 5,
  leakage = 6,
  numeric = 7,
  config = 8,
  validation_failed = 9,
  internal = 10,
};

struct error : std::runtime_error {
  status code;
  error(status c, const std::string& what) : std::runtime_error(what), code(c) {}
};

inline std::string strformat(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[512];
  vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return std::string(buf);
}

[[noreturn]] inline void fail(status c, const std::string& msg) { throw error(c, msg); }

inline void require(bool ok, status c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

// Tolerances used by the density-matrix invariants and the steppers.
constexpr double kHermTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kEigTol = 1e-6;

}  // namespace ps
