#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cor {

// Base for every error the harness raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input dataset (upstream HotPotQA / Gorilla files).
class IngestError : public Error {
public:
    IngestError(const std::string& message, std::size_t entry_index)
        : Error(message), entry_index_(entry_index) {}

    [[nodiscard]] std::size_t entry_index() const noexcept { return entry_index_; }

private:
    std::size_t entry_index_;
};

// A line-oriented file (canonical store, SFT file, mock script) failed to decode.
class FormatError : public Error {
public:
    FormatError(const std::string& message, std::size_t line)
        : Error(message), line_(line) {}

    // 1-based line number.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Precondition violation in a pure operation (empty question, bad position, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace cor
