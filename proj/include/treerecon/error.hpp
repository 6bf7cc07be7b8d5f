#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treerecon {

enum class ErrorCode {
  // input validation
  NotStochastic,
  NonPositiveEntry,
  BadDimension,
  BadPermutation,
  BadTreeSpec,
  BadInput,
  // resource budgets
  TreeTooLarge,
  EnumerationTooLarge,
  // numerics
  NoConvergence,
  NumericalUnderflow,
  CenterSingularity,
};

std::string_view to_string(ErrorCode code);

// True for codes caused by the caller's input (bad matrix, bad tree, too big).
bool is_validation(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treerecon
