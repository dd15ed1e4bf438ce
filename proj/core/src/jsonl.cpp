#include "prodkit/jsonl.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/text.hpp"

namespace prodkit {

std::optional<JsonlReader::Line> JsonlReader::next() {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_no_;
        if (text::is_blank(raw)) {
            last_good_ = line_no_;
            continue;
        }
        last_good_ = line_no_;
        return Line{line_no_, std::move(raw)};
    }
    if (in_.bad()) {
        throw IoError("stream read failure after line " + std::to_string(last_good_), last_good_);
    }
    return std::nullopt;
}

void JsonlWriter::write(const nlohmann::json& doc) {
    out_ << doc.dump() << '\n';
    if (!out_) throw IoError("stream write failure at line " + std::to_string(count_ + 1), count_);
    ++count_;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

nlohmann::json load_json_file(const std::string& path) {
    auto in = open_input(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace prodkit
