#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace namerec {

enum class ErrorCode {
  EmptyName,
  InvalidRatios,
  EmptyCultureHoldout,
  InsufficientData,
  ParseError,
  UnknownCulture,
  MissingLabel,
  EmptyCorpus,
  UnlabeledInput,
  RankTooLarge,
  UnknownMatrix,
  EmptyBatch,
  NoAdapters,
  EmptyValidation,
  UnknownLabel,
  EmptyMatrix,
  EmptySet,
  IllegalPolicy,
  SpecExhausted,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` identifies the contract
/// that was violated; the message carries the offending value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace namerec
