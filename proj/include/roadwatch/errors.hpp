// Error types shared across the library. Each condition the callers are
// expected to handle separately gets its own type.

#pragma once

#include <stdexcept>
#include <string>

namespace roadwatch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar argument outside its mathematical domain (z < 0, d <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Point at (or numerically indistinguishable from) the epipole.
struct DegenerateGeometry : Error {
  using Error::Error;
};

/// Fewer usable correspondences than EstimatorConfig::min_pairs.
struct InsufficientCorrespondences : Error {
  using Error::Error;
};

/// Two series that must be aligned have different lengths.
struct LengthMismatch : Error {
  using Error::Error;
};

/// Vehicle track contains no frame with a valid point.
struct EmptyTrack : Error {
  using Error::Error;
};

/// Input series shorter than the analysis window.
struct SeriesTooShort : Error {
  using Error::Error;
};

/// Configuration violates a documented invariant.
struct ConfigError : Error {
  using Error::Error;
};

/// Least-squares basis is rank deficient (e.g. all distances equal).
struct DegenerateFit : Error {
  using Error::Error;
};

/// Labeled event references a sequence with no computed response.
struct MissingSequence : Error {
  using Error::Error;
};

/// Scoring window falls entirely inside the response warm-up region.
struct UndefinedResponse : Error {
  using Error::Error;
};

/// Classification metrics require both classes to be present.
struct SingleClassError : Error {
  using Error::Error;
};

/// Too few events per class for the requested cross-validation.
struct TooFewEvents : Error {
  using Error::Error;
};

/// File could not be opened, read or written.
struct IoError : Error {
  using Error::Error;
};

/// File or configuration contents could not be parsed.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace roadwatch
