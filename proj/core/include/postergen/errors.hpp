#pragma once

#include <stdexcept>
#include <string>

namespace postergen {

/// A document could not be read or parsed at all.
class LoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A document parsed but violates the corpus schema or a type invariant.
/// The message names the offending field.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training could not start or diverged (non-finite loss).
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace postergen
