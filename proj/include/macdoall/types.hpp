#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace macdoall {

/// Station identifiers are 1-based: {1, ..., p}.
using StationId = std::uint32_t;
/// Task identifiers are 1-based: {1, ..., t}.
using TaskId = std::uint32_t;
using Round = std::int64_t;

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library derives from Error so callers
// can catch one type; the concrete subclasses name the contract that broke.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MACDOALL_DEFINE_ERROR(Name)            \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what) {} \
  }

MACDOALL_DEFINE_ERROR(CycleDetected);
MACDOALL_DEFINE_ERROR(UnknownElement);
MACDOALL_DEFINE_ERROR(NotFaultProne);
MACDOALL_DEFINE_ERROR(TooLarge);
MACDOALL_DEFINE_ERROR(BadLengths);
MACDOALL_DEFINE_ERROR(InvalidPair);
MACDOALL_DEFINE_ERROR(WrongChannel);
MACDOALL_DEFINE_ERROR(IllegalCrash);
MACDOALL_DEFINE_ERROR(UnknownStrategy);
MACDOALL_DEFINE_ERROR(ConfigInvalid);
MACDOALL_DEFINE_ERROR(InsufficientCells);

#undef MACDOALL_DEFINE_ERROR

/// Raised inside a run when the round cap is hit; the engine converts it into
/// a Timeout outcome.
class RoundCapExceeded : public Error {
 public:
  explicit RoundCapExceeded(Round cap)
      : Error("round cap " + std::to_string(cap) + " exceeded") {}
};

// ---------------------------------------------------------------------------
// Integer helpers shared by protocols and bound formulas.
// ---------------------------------------------------------------------------

/// Smallest j >= 0 with 2^j >= x (x >= 1). ceil_log2(1) == 0.
constexpr std::uint32_t ceil_log2(std::uint64_t x) {
  std::uint32_t j = 0;
  while ((std::uint64_t{1} << j) < x) ++j;
  return j;
}

/// Smallest s with s*s >= x.
constexpr std::uint64_t ceil_sqrt(std::uint64_t x) {
  std::uint64_t lo = 0;
  std::uint64_t hi = x < (std::uint64_t{1} << 32) ? x : (std::uint64_t{1} << 32);
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (mid * mid >= x) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace macdoall
