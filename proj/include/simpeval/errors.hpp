#pragma once

#include <stdexcept>
#include <string>

namespace simpeval {

/// Base of every toolkit error. `exit_code()` is what the CLI returns when the
/// error escapes a subcommand.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, int exit_code = 1)
        : std::runtime_error(what), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what, 2) {}
};

class IngestionError : public Error {
public:
    explicit IngestionError(const std::string& what) : Error("ingestion error: " + what, 3) {}
};

class MetricError : public Error {
public:
    explicit MetricError(const std::string& what) : Error("metric error: " + what, 1) {}
};

class ScorerError : public Error {
public:
    explicit ScorerError(const std::string& what) : Error("scorer error: " + what, 4) {}
};

class TransportError : public ScorerError {
public:
    explicit TransportError(const std::string& what) : ScorerError("transport: " + what) {}
};

/// Fixture replay was asked for a request id the fixture file does not hold.
class FixtureMiss : public ScorerError {
public:
    explicit FixtureMiss(const std::string& id)
        : ScorerError("fixture miss for request id " + id), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation error: " + what, 1) {}
};

class ReportError : public Error {
public:
    explicit ReportError(const std::string& what) : Error("report error: " + what, 1) {}
};

class SamplingError : public Error {
public:
    explicit SamplingError(const std::string& what) : Error("sampling error: " + what, 1) {}
};

class IOError : public Error {
public:
    explicit IOError(const std::string& what) : Error("io error: " + what, 1) {}
};

} // namespace simpeval
