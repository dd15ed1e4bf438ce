#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>
#include <optional>
#include <string>

namespace prodkit {

/// Reads one line-delimited document at a time. Lines are 1-indexed. Blank
/// lines are skipped. Stream failures other than EOF raise IoError carrying
/// the last successfully read line.
class JsonlReader {
public:
    explicit JsonlReader(std::istream& in) : in_(in) {}

    struct Line {
        std::size_t number;
        std::string raw;
    };

    std::optional<Line> next();

    std::size_t last_good_line() const { return last_good_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::size_t last_good_ = 0;
};

/// Serializes with sorted object keys (nlohmann's default ordering), one
/// document per line. Byte-stable for identical inputs.
class JsonlWriter {
public:
    explicit JsonlWriter(std::ostream& out) : out_(out) {}

    void write(const nlohmann::json& doc);
    std::size_t count() const { return count_; }

private:
    std::ostream& out_;
    std::size_t count_ = 0;
};

/// Opens a file for reading or throws IoError.
std::ifstream open_input(const std::string& path);

/// Opens a file for writing (truncating) or throws IoError.
std::ofstream open_output(const std::string& path);

/// Reads and parses a whole-file JSON document.
nlohmann::json load_json_file(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::json& doc);

}  // namespace prodkit
