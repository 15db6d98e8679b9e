#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace colab {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated an operation's precondition (bad argument, bad count, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// The run configuration is unusable: missing fields, missing credentials,
/// inconsistent schedule, HTTP 4xx from an endpoint, and similar.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A generation request failed after exhausting its retry budget.
class BackendError : public Error {
public:
    BackendError(const std::string& msg, bool retryable)
        : Error(msg), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

/// Replay lookup missed in strict mode. Carries the key that was requested.
class FixtureMissingError : public Error {
public:
    FixtureMissingError(const std::string& msg, std::string key)
        : Error(msg), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Fixture store write failure or key conflict (same key, different text).
class StorageError : public Error {
public:
    using Error::Error;
};

/// A dataset or fixture file could not be parsed. Carries the 1-based line.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::string path, std::size_t line)
        : Error(msg), path_(std::move(path)), line_(line) {}
    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

/// Evaluation could not run, e.g. the answer map misses dataset ids.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& msg, std::vector<std::string> missing_ids)
        : Error(msg), missing_ids_(std::move(missing_ids)) {}
    const std::vector<std::string>& missing_ids() const { return missing_ids_; }

private:
    std::vector<std::string> missing_ids_;
};

/// Profiling exceeded its configured request budget before issuing requests.
class BudgetError : public Error {
public:
    using Error::Error;
};

} // namespace colab
