#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lgcf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector lengths disagree or are too short for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

/// Raised when the training loss becomes NaN or infinite.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, double loss)
        : Error("training diverged at epoch " + std::to_string(epoch) + " (loss=" + std::to_string(loss) + ")"),
          epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace lgcf
