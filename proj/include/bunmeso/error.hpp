#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bunmeso {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line. Line numbers are 1-based and count the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateError : public Error {
 public:
  DuplicateError(std::size_t line, const std::string& tx_id)
      : Error("line " + std::to_string(line) + ": duplicate tx_id '" + tx_id + "'"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (unsorted input, mixed granularity, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Counts handed to a combinatorial routine that cannot describe a real instance.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class EmptyGraphError : public Error {
 public:
  EmptyGraphError() : Error("operation requires a graph with at least one node") {}
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : Error(what + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

}  // namespace bunmeso
