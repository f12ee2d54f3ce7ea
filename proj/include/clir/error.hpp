#pragma once

#include <stdexcept>
#include <string>

namespace clir {

/// Base class for all library errors. The taxonomy below maps onto the CLI
/// exit codes: config_error -> 1, data_error (and subtypes) -> 2,
/// internal_error -> 3.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or arguments supplied by the caller.
class config_error : public error {
 public:
  explicit config_error(const std::string& msg) : error(msg) {}
};

/// Input data violates a documented contract (duplicate ids, empty training
/// set, unknown words, ...).
class data_error : public error {
 public:
  explicit data_error(const std::string& msg) : error(msg) {}
};

/// Malformed file content. Carries a 1-based line number when known.
class format_error : public data_error {
 public:
  format_error(const std::string& msg, std::size_t line = 0)
      : data_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Numerically degenerate input, e.g. a zero vector where a direction is
/// required.
class degenerate_input_error : public data_error {
 public:
  explicit degenerate_input_error(const std::string& msg) : data_error(msg) {}
};

/// Matrix (numerically) singular during a solve.
class singular_matrix_error : public data_error {
 public:
  explicit singular_matrix_error(const std::string& msg) : data_error(msg) {}
};

/// Broken internal invariant; indicates a bug, not bad input.
class internal_error : public error {
 public:
  explicit internal_error(const std::string& msg) : error(msg) {}
};

}  // namespace clir
