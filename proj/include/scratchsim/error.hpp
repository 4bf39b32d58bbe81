#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scratchsim {

/// Base of every error raised by the library. `stage()` is set by the
/// experiment pipelines when an error is propagated out of a stage.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed binary or JSON input. Carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnsupportedDimensionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Norm or energy drift beyond tolerance during time stepping.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// A particle left the domain box.
class ConfinementError : public Error {
public:
    using Error::Error;
};

/// Random construction ran out of attempts.
class CapacityError : public Error {
public:
    using Error::Error;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class ProjectionError : public Error {
public:
    using Error::Error;
};

class InterferenceError : public Error {
public:
    using Error::Error;
};

class InfeasibleTimingError : public Error {
public:
    using Error::Error;
};

/// Should be unreachable when documented preconditions hold.
class InternalError : public Error {
public:
    using Error::Error;
};

/// Wraps an error escaping one pipeline stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace scratchsim
