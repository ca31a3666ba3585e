#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plkit {

// Input data violated the documented schema or a model invariant. Carries
// one message per violation so callers can report all of them at once.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// File did not parse as the documented JSON subset.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditioning on the label-consistent assignment set failed: the prior puts
// numerically no mass on any foreground assignment.
class DegeneratePosteriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synthetic scene placement exhausted its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plkit
