#pragma once

#include <stdexcept>
#include <string>

namespace metricslim {

enum class ErrorKind {
  InvalidArgument,
  MissingColumn,
  UnknownColumn,
  NonNumericCell,
  NegativeMetricValue,
  MalformedRow,
  EmptyFile,
  NegativeBugCount,
  AlreadyFiltered,
  NotBinarized,
  DuplicateRelease,
  ManifestError,
  LengthMismatch,
  TooFewSamples,
  EmptySubset,
  SingleClassData,
  MissingFeature,
  DegenerateTestSet,
  AllZeroDifferences,
  NoTrainingData,
  MatchingFailure,
  ConfigError,
  MissingArtifacts,
  ModelFormat,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// grid runner, which records failures per cell) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace metricslim
