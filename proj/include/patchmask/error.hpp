#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patchmask {

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorKind {
    Config,       // bad parameters or preconditions
    Data,         // unreadable or inconsistent input data
    Convergence,  // a search or iteration could not reach its goal
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class SizeMismatch : public Error {
public:
    explicit SizeMismatch(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NonFiniteInput : public Error {
public:
    explicit NonFiniteInput(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class UnsupportedFormat : public Error {
public:
    explicit UnsupportedFormat(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(ErrorKind::Data, what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnreachableTarget : public Error {
public:
    explicit UnreachableTarget(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

}  // namespace patchmask
