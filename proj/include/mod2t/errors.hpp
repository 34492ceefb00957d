#pragma once

#include <stdexcept>
#include <string>

namespace mod2t {

// Invalid arguments to an in-process API call (degenerate box, dimension
// mismatch, out-of-range config value).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed content in an input file. Carries the 1-based line number when
// the failure is attributable to a single line (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Filesystem / OS level failure (missing file, unreadable image, write error).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mod2t
