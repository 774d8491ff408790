#ifndef CONJOINT_ERRORS_HPP
#define CONJOINT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace conjoint {

// Each error class maps onto one CLI exit code (see exit_code_for).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an operation's arguments.
class ContractError : public Error {
public:
  using Error::Error;
};

/// Unknown attribute or level while coding a profile.
class CodingError : public ContractError {
public:
  using ContractError::ContractError;
};

/// Malformed or degenerate input data (constant column, bad CSV row...).
class DataError : public Error {
public:
  using Error::Error;
};

/// Survey design cannot be generated (e.g. only one distinct profile).
class DesignError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration value; message names the offending field.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Sampler failure (divergence rate above threshold, non-finite start...).
class FitError : public Error {
public:
  using Error::Error;
};

/// Price coefficient not safely negative, so the WTP ratio is meaningless.
class SignSafetyError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace conjoint

#endif  // CONJOINT_ERRORS_HPP
