#pragma once

#include <stdexcept>
#include <string>

namespace colink {

// Base for every error raised by the library. The CLI maps the subclasses
// onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t byte_offset)
        : Error(what), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

class NotAnObject : public Error {
public:
    using Error::Error;
};

// Bad configuration or corpus spec. `key()` names the offending entry when known.
class ValidationError : public Error {
public:
    ValidationError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SourceUnavailable : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnknownFormat : public Error {
public:
    using Error::Error;
};

class DuplicateCollection : public Error {
public:
    using Error::Error;
};

class DegenerateRange : public Error {
public:
    using Error::Error;
};

class NoEdges : public Error {
public:
    using Error::Error;
};

class CorpusMismatch : public Error {
public:
    using Error::Error;
};

// Raised when an internal consistency check fails; indicates a bug.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

// Wraps an error escaping one pipeline stage with the stage name attached.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace colink
