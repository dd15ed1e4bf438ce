#include "prodkit/experts.hpp"

#include "prodkit/errors.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace prodkit::experts {

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must be a full URL: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string base64_encode(const std::string& data) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

std::string guess_mime(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "png") return "image/png";
    if (ext == "gif") return "image/gif";
    if (ext == "webp") return "image/webp";
    return "image/jpeg";
}

class RemoteTransport : public Transport {
public:
    explicit RemoteTransport(RemoteTransportSpec spec) : spec_(std::move(spec)) {}

    ChatReply send(const ChatRequest& req) override {
        ParsedUrl url = parse_url(spec_.endpoint);

        // One client per request keeps this safe under concurrent dispatch.
        httplib::Client client(url.base);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
        auto rem_us = std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
        client.set_connection_timeout(static_cast<time_t>(secs.count()), rem_us.count());
        client.set_read_timeout(static_cast<time_t>(secs.count()), rem_us.count());
        client.set_write_timeout(static_cast<time_t>(secs.count()), rem_us.count());

        httplib::Headers headers;
        if (!spec_.credential_env.empty()) {
            if (const char* token = std::getenv(spec_.credential_env.c_str())) {
                headers.emplace("Authorization", std::string("Bearer ") + token);
            }
        }

        nlohmann::json body = build_body(req);
        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
                return {AnswerStatus::Timeout, "", true};
            }
            return {AnswerStatus::TransportError, "", true};
        }

        if (res->status == 200) return parse_completion(res->body);
        if (res->status == 408) return {AnswerStatus::Timeout, "", true};
        if (res->status == 429 || res->status >= 500) return {AnswerStatus::TransportError, "", true};
        return {AnswerStatus::TransportError, "", false};
    }

private:
    nlohmann::json build_body(const ChatRequest& req) const {
        nlohmann::json message{{"role", "user"}};
        if (req.image_ref) {
            std::string image_url;
            if (spec_.image_mode == ImageMode::Base64) {
                std::ifstream in(*req.image_ref, std::ios::binary);
                if (!in) throw IoError("cannot read image for base64 transport: " + *req.image_ref);
                std::ostringstream bytes;
                bytes << in.rdbuf();
                image_url = "data:" + guess_mime(*req.image_ref) + ";base64," + base64_encode(bytes.str());
            } else {
                image_url = *req.image_ref;
            }
            message["content"] = nlohmann::json::array({
                nlohmann::json{{"type", "image_url"}, {"image_url", {{"url", image_url}}}},
                nlohmann::json{{"type", "text"}, {"text", req.prompt}},
            });
        } else {
            message["content"] = req.prompt;
        }
        nlohmann::json body{
            {"messages", nlohmann::json::array({message})},
            {"temperature", req.sampling.temperature},
            {"top_p", req.sampling.top_p},
        };
        if (!spec_.model.empty()) body["model"] = spec_.model;
        return body;
    }

    static ChatReply parse_completion(const std::string& body) {
        nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
        if (doc.is_discarded()) return {AnswerStatus::TransportError, "", false};
        auto choices = doc.find("choices");
        if (choices == doc.end() || !choices->is_array() || choices->empty()) {
            return {AnswerStatus::TransportError, "", false};
        }
        const auto& first = (*choices)[0];
        if (first.value("finish_reason", "") == "content_filter") {
            return {AnswerStatus::Refused, "", false};
        }
        std::string content;
        if (first.contains("message") && first["message"].contains("content") &&
            first["message"]["content"].is_string()) {
            content = first["message"]["content"].get<std::string>();
        } else if (first.contains("text") && first["text"].is_string()) {
            content = first["text"].get<std::string>();
        }
        if (content.empty()) return {AnswerStatus::Refused, "", false};
        return {AnswerStatus::Ok, content, false};
    }

    RemoteTransportSpec spec_;
};

}  // namespace

std::shared_ptr<Transport> make_remote_transport(const RemoteTransportSpec& spec) {
    return std::make_shared<RemoteTransport>(spec);
}

}  // namespace prodkit::experts
