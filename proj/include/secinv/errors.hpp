#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace secinv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A domain object (target, source, network, config) violates its invariants.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A plan was evaluated against a network with a different edge set.
class PlanMismatchError : public Error {
 public:
  using Error::Error;
};

/// An analytical routine was called outside the assumptions it relies on.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// One row of a solver's convergence history.
struct TraceRecord {
  std::size_t iteration = 0;
  double primal_residual = 0.0;
  double perceived_loss = 0.0;
  double objective = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

/// Raised when an iterative solver exhausts its iteration budget. Carries the
/// trace recorded so far.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<TraceRecord> trace)
      : Error(what), trace_(std::move(trace)) {}

  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceRecord> trace_;
};

/// A message expected in a consensus round never arrived.
class MissingMessageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based; 0 when no location applies
  std::size_t column = 0;
  std::string message;
};

/// Scenario text failed to parse or validate. Lists every violation found.
class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace secinv
