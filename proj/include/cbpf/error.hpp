#pragma once

#include <stdexcept>
#include <string>

namespace cbpf {

// Input or configuration violates a documented contract.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries file and line context.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, long line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(file), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

    const std::string& file() const { return file_; }
    long line() const { return line_; }

private:
    std::string file_;
    long line_ = 0;
};

// A pre-filter selected no usable training ratings; callers fall back to the
// model trained on the full training pool.
class EmptyLocalDataset : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cbpf
