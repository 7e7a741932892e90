#pragma once

#include <stdexcept>
#include <string>

namespace levelstat {

/// Broad failure classes. The command-line tool maps these onto exit codes:
/// validation-type failures exit with 2, numerical failures with 3.
enum class ErrorClass {
  Validation,
  Numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorClass::Validation, "domain error: " + what) {}
};

// Too few elements for the requested operation.
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorClass::Validation, "size error: " + what) {}
};

// A level sequence of the wrong statistics kind.
class KindError : public Error {
 public:
  explicit KindError(const std::string& what) : Error(ErrorClass::Validation, "kind error: " + what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorClass::Validation, "data error: " + what) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what)
      : Error(ErrorClass::Validation, "consistency error: " + what) {}
};

class WindowError : public Error {
 public:
  explicit WindowError(const std::string& what) : Error(ErrorClass::Validation, "window error: " + what) {}
};

/// File or config parse failure; `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorClass::Validation, format(source, line, what)), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& what) {
    std::string out = "parse error: " + source;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + what;
  }
  std::size_t line_;
};

/// Configuration rejected; the message lists every offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::Validation, "config error: " + what) {}
};

// Least-squares or likelihood fit could not be carried out.
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ErrorClass::Numerical, "fit error: " + what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::Numerical, "numerical error: " + what) {}
};

// An estimator is undefined for the given data (e.g. zero variance).
class UndefinedEstimateError : public Error {
 public:
  explicit UndefinedEstimateError(const std::string& what)
      : Error(ErrorClass::Numerical, "undefined estimate: " + what) {}
};

}  // namespace levelstat
