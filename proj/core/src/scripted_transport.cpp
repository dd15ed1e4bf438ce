#include "prodkit/errors.hpp"
#include "prodkit/experts.hpp"
#include "prodkit/hash.hpp"
#include "prodkit/jsonl.hpp"

#include <algorithm>
#include <tuple>

namespace prodkit::experts {

std::string ScriptedTransport::prompt_hash(std::string_view prompt) {
    return fnv1a64_hex(prompt);
}

std::string ScriptedTransport::key(std::string_view expert_id, std::string_view hash) {
    std::string k(expert_id);
    k.push_back('\0');
    k += hash;
    return k;
}

void ScriptedTransport::insert(Entry e) {
    std::lock_guard lock(mu_);
    entries_[key(e.expert_id, e.hash)] = std::move(e);
}

void ScriptedTransport::add(std::string_view expert_id, std::string_view prompt, std::string reply) {
    Entry e;
    e.status = AnswerStatus::Ok;
    e.text = std::move(reply);
    e.expert_id = std::string(expert_id);
    e.hash = prompt_hash(prompt);
    insert(std::move(e));
}

void ScriptedTransport::add_status(std::string_view expert_id, std::string_view prompt, AnswerStatus status) {
    Entry e;
    e.status = status;
    e.expert_id = std::string(expert_id);
    e.hash = prompt_hash(prompt);
    insert(std::move(e));
}

ChatReply ScriptedTransport::send(const ChatRequest& req) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key(req.expert_id, prompt_hash(req.prompt)));
    if (it == entries_.end()) {
        // Defined fixture semantics: no entry means the expert declines.
        return {AnswerStatus::Refused, "", false};
    }
    return {it->second.status, it->second.text, true};
}

std::size_t ScriptedTransport::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::shared_ptr<ScriptedTransport> ScriptedTransport::from_json(const nlohmann::json& doc) {
    auto t = std::make_shared<ScriptedTransport>();
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw ConfigError("scripted fixture: expected an object with an entries array");
    }
    for (const auto& item : doc["entries"]) {
        if (!item.is_object() || !item.contains("expert")) {
            throw ConfigError("scripted fixture: entries need an expert id");
        }
        Entry e;
        e.expert_id = item["expert"].get<std::string>();
        if (item.contains("prompt")) {
            e.hash = prompt_hash(item["prompt"].get<std::string>());
        } else if (item.contains("prompt_hash")) {
            e.hash = item["prompt_hash"].get<std::string>();
        } else {
            throw ConfigError("scripted fixture: entries need prompt or prompt_hash");
        }
        if (item.contains("status")) {
            e.status = answer_status_from(item["status"].get<std::string>());
            e.text = item.value("reply", "");
        } else if (item.contains("reply")) {
            e.status = AnswerStatus::Ok;
            e.text = item["reply"].get<std::string>();
        } else {
            throw ConfigError("scripted fixture: entries need reply or status");
        }
        t->insert(std::move(e));
    }
    return t;
}

std::shared_ptr<ScriptedTransport> ScriptedTransport::load_file(const std::string& path) {
    return from_json(load_json_file(path));
}

nlohmann::json ScriptedTransport::to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::json entries = nlohmann::json::array();
    // Sorted for byte-stable fixture files.
    std::vector<const Entry*> ordered;
    ordered.reserve(entries_.size());
    for (const auto& [k, e] : entries_) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(), [](const Entry* a, const Entry* b) {
        return std::tie(a->expert_id, a->hash) < std::tie(b->expert_id, b->hash);
    });
    for (const Entry* e : ordered) {
        nlohmann::json item{{"expert", e->expert_id}, {"prompt_hash", e->hash}};
        if (e->status == AnswerStatus::Ok) {
            item["reply"] = e->text;
        } else {
            item["status"] = std::string(to_string(e->status));
            if (!e->text.empty()) item["reply"] = e->text;
        }
        entries.push_back(std::move(item));
    }
    return nlohmann::json{{"entries", entries}};
}

}  // namespace prodkit::experts
