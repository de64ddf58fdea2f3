#ifndef EASTE_ERROR_HPP
#define EASTE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace easte {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (XML, JSON lines, checkpoint files).
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
      : Error(format(msg, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
    if (line == 0) return msg;
    std::string s = msg + " (line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ")";
  }
  std::size_t line_;
  std::size_t column_;
};

/// A label value outside the closed entity/aspect/sentiment inventories.
class InventoryError : public Error {
public:
  using Error::Error;
};

/// A target span that does not agree with the sentence text.
class SpanError : public Error {
public:
  using Error::Error;
};

/// A category or label string with the wrong shape.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Invalid model, training, or prompt configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Token id outside the model vocabulary.
class VocabularyError : public Error {
public:
  using Error::Error;
};

/// Non-finite values encountered during training.
class NumericError : public Error {
public:
  using Error::Error;
};

/// HTTP transport failure after retries are exhausted.
class TransportError : public Error {
public:
  using Error::Error;
};

/// Completion fixture lookup failed.
class MissingFixtureError : public Error {
public:
  explicit MissingFixtureError(const std::string& digest)
      : Error("no fixture for prompt digest " + digest), digest_(digest) {}
  const std::string& digest() const { return digest_; }

private:
  std::string digest_;
};

} // namespace easte

#endif // EASTE_ERROR_HPP
