#pragma once

#include <stdexcept>
#include <string>

namespace prodkit {

/// Unreadable or unwritable input/output. Carries the position of the last
/// good line when the failure happened mid-stream.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what, std::size_t last_good_line = 0)
        : std::runtime_error(what), last_good_line_(last_good_line) {}

    std::size_t last_good_line() const { return last_good_line_; }

private:
    std::size_t last_good_line_;
};

/// Invalid configuration: expert specs, template banks, CLI wiring.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structural problems in a category taxonomy document (cycles, duplicate
/// siblings, empty names).
class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace prodkit
