#pragma once

#include <stdexcept>
#include <string>

namespace dpdnet {

/// Malformed file header or payload that does not follow the declared format.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File payload shorter than its header promises.
struct TruncationError : FormatError {
  using FormatError::FormatError;
};

/// Raster data that a format cannot represent (e.g. multi-channel PGM).
struct UnsupportedFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand dimensions or channel counts disagree.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numeric parameter lies outside its admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input data violates an operation's precondition (non-finite values,
/// unlabeled pixels where labels are required, single-class ground truth).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Training labels contain only one class.
struct DegenerateTrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dpdnet
