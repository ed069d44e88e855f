#pragma once

#include <stdexcept>
#include <string>

namespace modeseek {

struct InvalidToken : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VocabMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroSupport : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyVariantSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OrderTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoFeasibleSequence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PredictorDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File or JSON content that does not parse as the expected format.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full enumeration would exceed the configured sequence bound.
struct EnumerationBound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace modeseek
