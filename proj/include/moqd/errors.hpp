#ifndef MOQD_ERRORS_HPP
#define MOQD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace moqd {

/// Mismatched vector lengths or network shapes.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation not defined for the given objective count.
class UnsupportedDimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration. `field()` holds the dotted path of the offending key when known.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : std::invalid_argument(field.empty() ? message : field + ": " + message), _field(std::move(field)) {}

    const std::string& field() const noexcept { return _field; }

private:
    std::string _field;
};

class EmptyArchiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough samples in a replay buffer to draw a minibatch.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), _message(message), _line(line) {}

    const std::string& message() const noexcept { return _message; }
    std::size_t line() const noexcept { return _line; }

private:
    std::string _message;
    std::size_t _line;
};

} // namespace moqd

#endif
