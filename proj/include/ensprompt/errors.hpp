#pragma once

#include <stdexcept>
#include <string>

namespace ensprompt {

// Caller broke a documented precondition (length mismatch, bad dimension, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Network / endpoint failure after retries were exhausted.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scripted client ran out of canned responses. Always a test bug.
class ScriptExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The optimizer model produced something unusable (e.g. empty text).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt / missing / wrong-version artifacts and data files.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ensprompt

#include <vector>

namespace ensprompt {

// Configuration rejected; carries every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace ensprompt
