#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace gapbench {

// Error categories map onto CLI exit codes (precondition 2, convergence 3, I/O 4).
enum class ErrorKind {
  Structural,
  Domain,
  Precondition,
  Convergence,
  Io,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Named numeric diagnostics (residuals, offending indices, ...).
  const std::map<std::string, double>& details() const noexcept { return details_; }
  Error& with(const std::string& key, double value) {
    details_[key] = value;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::map<std::string, double> details_;
};

// Keeps the concrete type through `throw X(...).with(...)`.
template <class Derived, ErrorKind Kind>
class ErrorOf : public Error {
 public:
  explicit ErrorOf(const std::string& what) : Error(Kind, what) {}
  Derived& with(const std::string& key, double value) {
    Error::with(key, value);
    return static_cast<Derived&>(*this);
  }
};

class StructuralError : public ErrorOf<StructuralError, ErrorKind::Structural> {
 public:
  using ErrorOf::ErrorOf;
};

class DomainError : public ErrorOf<DomainError, ErrorKind::Domain> {
 public:
  using ErrorOf::ErrorOf;
};

class PreconditionError : public ErrorOf<PreconditionError, ErrorKind::Precondition> {
 public:
  using ErrorOf::ErrorOf;
};

class ConvergenceError : public ErrorOf<ConvergenceError, ErrorKind::Convergence> {
 public:
  using ErrorOf::ErrorOf;
};

class IoError : public ErrorOf<IoError, ErrorKind::Io> {
 public:
  using ErrorOf::ErrorOf;
};

class InternalError : public ErrorOf<InternalError, ErrorKind::Internal> {
 public:
  using ErrorOf::ErrorOf;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace gapbench
