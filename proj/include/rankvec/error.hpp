#pragma once

#include <stdexcept>
#include <string>

namespace rankvec {

// Caller passed arguments that violate an operation's contract (shape
// mismatch, out-of-range k, invalid config). Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Mathematically undefined result: zero-norm vectors, degenerate rank
// vectors, correlation over constant data. Maps to CLI exit code 2.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Malformed or inconsistent input data: bad file headers, non-finite
// values, fingerprint mismatches. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rankvec
