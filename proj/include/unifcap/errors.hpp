#pragma once

#include <stdexcept>
#include <string>

namespace unifcap {

enum class ErrorCode {
  NonPositiveR,
  InvalidDistribution,
  InvalidCost,
  NegativeMass,
  DegenerateInput,
  InvalidK,
  InfeasibleSupport,
  NoRootFound,
  BracketFailure,
  InvalidBudget,
  AnalyticUnavailable,
  WrongRegime,
  GridTooCoarse,
  NotConverged,
};

const char* to_string(ErrorCode code);

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace unifcap
