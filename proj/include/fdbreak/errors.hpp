#ifndef FDBREAK_ERRORS_HPP
#define FDBREAK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fdbreak {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or violated precondition. CLI maps this to exit code 2.
class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

/// Evaluation point outside the [0,1] domain.
class DomainError : public ArgumentError {
public:
  explicit DomainError(const std::string& msg) : ArgumentError(msg) {}
};

/// CSV ingestion failure; carries the offending 1-based line number
/// (0 when the failure is not tied to a specific line).
class IngestError : public ArgumentError {
public:
  IngestError(const std::string& msg, long line)
      : ArgumentError(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Weighted Gram matrix remained ill-conditioned after the ridge fallback.
/// The message names the offending curve range. CLI exit code 3.
class SingularDesignError : public Error {
public:
  explicit SingularDesignError(const std::string& msg) : Error(msg) {}
};

/// The pointwise variance proxy is identically zero, so the normalized
/// statistics are undefined. CLI exit code 3.
class DegenerateVarianceError : public Error {
public:
  explicit DegenerateVarianceError(const std::string& msg) : Error(msg) {}
};

}  // namespace fdbreak

#endif
