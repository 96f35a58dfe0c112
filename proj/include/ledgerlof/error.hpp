#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ledgerlof {

/// Base class for every error raised by the library. `kind()` is a stable
/// lowercase tag used by the CLI when reporting failures.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, std::string const &message)
    : std::runtime_error(message), kind_(std::move(kind))
  {
  }
  std::string const &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ParseError : public Error
{
public:
  ParseError(std::size_t line, std::string const &message)
    : Error("parse", "line " + std::to_string(line) + ": " + message), line_(line)
  {
  }
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Ledger references that do not resolve (dangling or duplicate tx ids).
class IntegrityError : public Error
{
public:
  explicit IntegrityError(std::string const &message) : Error("integrity", message) {}
};

class ConsistencyError : public Error
{
public:
  explicit ConsistencyError(std::string const &message) : Error("consistency", message) {}
};

class InsufficientDataError : public Error
{
public:
  explicit InsufficientDataError(std::string const &message) : Error("insufficient-data", message) {}
};

class DegenerateDistributionError : public Error
{
public:
  explicit DegenerateDistributionError(std::string const &message) : Error("degenerate-distribution", message) {}
};

class InfeasibleError : public Error
{
public:
  explicit InfeasibleError(std::string const &message) : Error("infeasible", message) {}
};

class DomainError : public Error
{
public:
  explicit DomainError(std::string const &message) : Error("domain", message) {}
};

class LookupError : public Error
{
public:
  explicit LookupError(std::string const &message) : Error("lookup", message) {}
};

class UndefinedMetricError : public Error
{
public:
  explicit UndefinedMetricError(std::string const &message) : Error("undefined-metric", message) {}
};

class ConfigError : public Error
{
public:
  explicit ConfigError(std::string const &message) : Error("config", message) {}
};

} // namespace ledgerlof
