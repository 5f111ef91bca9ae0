#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stormreach {

/// Malformed input data (bad row, bad number, bad file name).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(std::move(msg)), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that breaks a structural rule (duplicate IDs, extremity ordering, spacing).
class SchemaError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation.
class DomainError : public std::domain_error {
  using std::domain_error::domain_error;
};

/// Statistical fit impossible on the given data (e.g. zero spread).
class DegenerateError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Arrays/grids whose shapes do not line up.
class DimensionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Violated internal invariant. Maps to exit code 3 in the CLI.
class InternalError : public std::logic_error {
  using std::logic_error::logic_error;
};

#define STORMREACH_ASSERT(cond, msg)                              \
  do {                                                            \
    if (!(cond)) throw ::stormreach::InternalError(msg);          \
  } while (0)

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a process-wide sink for warnings; returns the previous one.
/// The default handler writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace stormreach
