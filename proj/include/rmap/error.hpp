#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmap {

// Every failure the toolkit can diagnose maps to one of these kinds, so
// callers (and the check runner) can branch on the category instead of
// string-matching messages.
enum class ErrorKind {
  Parse,              // malformed expression or manifest text
  UnknownIdentifier,  // identifier not among coords/constants/functions
  Domain,             // evaluation left the function's domain (log, sqrt, /0)
  DimensionMismatch,
  UnresolvedReference,  // manifest names an object that does not exist
  SingularMetric,
  RankDeficient,
  DegenerateFit,
  NonOrthogonal,
  EmptyDistribution,
  ImageOutsideDomain,
  DomainExit,    // geodesic left the chart domain
  StepTooLarge,  // geodesic norm drift exceeded the abort threshold
  Invalid,       // anything else that violates a precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  Error(ErrorKind kind, const std::string& msg, std::ptrdiff_t offset)
      : std::runtime_error(msg), kind_(kind), offset_(offset) {}

  ErrorKind kind() const { return kind_; }

  // Byte offset into the source text for parse/evaluation errors, -1 when
  // not applicable.
  std::ptrdiff_t offset() const { return offset_; }

 private:
  ErrorKind kind_;
  std::ptrdiff_t offset_ = -1;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

[[noreturn]] inline void fail_at(ErrorKind kind, const std::string& msg,
                                 std::ptrdiff_t offset) {
  throw Error(kind, msg, offset);
}

}  // namespace rmap
