#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adnet {

enum class ErrorCode {
  // chat_corpus
  MissingParticipantTier,
  MalformedTier,
  BadDemographics,
  MissingLabel,
  EmptyCorpus,
  // text_pipeline
  EmptyText,
  UnknownTag,
  // lexical_features
  DimensionMismatch,
  EmptyFile,
  MissingLexicon,
  BadLexicon,
  // tensor_autodiff
  ShapeMismatch,
  NonFiniteValue,
  NotScalarLoss,
  // model
  ZeroClass,
  Diverged,
  VersionMismatch,
  CorruptFile,
  // evaluation
  LengthMismatch,
  TooSmall,
  // plumbing
  Io,
  BadConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adnet
