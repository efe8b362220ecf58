#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace selfscore {

/// Base of every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (weights, prices, gateway settings, CLI input).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed XML in a posts dump. `offset` is the byte offset of the last
/// position known to be valid.
class XmlParseError : public Error {
public:
    XmlParseError(const std::string& what, std::uint64_t offset)
        : Error("malformed XML at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class GatewayError : public Error {
public:
    GatewayError(const std::string& what, int attempts, int http_status = 0)
        : Error(what), attempts_(attempts), http_status_(http_status) {}

    int attempts() const noexcept { return attempts_; }
    int http_status() const noexcept { return http_status_; }

private:
    int attempts_;
    int http_status_;
};

/// A mock gateway received a request no remaining script entry matches.
class MockExhaustedError : public Error {
public:
    using Error::Error;
};

class AssessmentError : public Error {
public:
    enum class Kind { unparseable, out_of_range };

    AssessmentError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Statistical input with no usable variance (e.g. all observations equal).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

} // namespace selfscore
