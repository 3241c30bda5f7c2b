#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace viris {

/// Invalid argument, configuration value or precondition violation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A conic or circle could not be fitted to the supplied data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classical localization found no credible pupil/limbus circle.
class LocalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Segmentation post-processing exhausted every route to a result.
class SegmentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quality metric could not be evaluated on the given geometry.
class QualityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two templates share too few jointly valid bits at every shift.
class MatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input; `field()` names the offending component.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Binary template file rejected by the reader or writer.
class TemplateFormatError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadVersion, Truncated, DimensionOverflow };

  TemplateFormatError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace viris
