#include "prodkit/experts.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/hash.hpp"
#include "prodkit/jsonl.hpp"

namespace prodkit::experts {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::Answerer: return "answerer";
        case Role::Querier: return "querier";
        case Role::Judge: return "judge";
    }
    return "?";
}

Role role_from(std::string_view s) {
    if (s == "answerer") return Role::Answerer;
    if (s == "querier") return Role::Querier;
    if (s == "judge") return Role::Judge;
    throw ConfigError("unknown expert role: " + std::string(s));
}

std::string_view to_string(AnswerStatus s) {
    switch (s) {
        case AnswerStatus::Ok: return "ok";
        case AnswerStatus::Timeout: return "timeout";
        case AnswerStatus::Refused: return "refused";
        case AnswerStatus::TransportError: return "transport_error";
    }
    return "?";
}

AnswerStatus answer_status_from(std::string_view s) {
    if (s == "ok") return AnswerStatus::Ok;
    if (s == "timeout") return AnswerStatus::Timeout;
    if (s == "refused") return AnswerStatus::Refused;
    if (s == "transport_error") return AnswerStatus::TransportError;
    throw ConfigError("unknown answer status: " + std::string(s));
}

ExpertSpec expert_spec_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("expert spec must be an object");
    ExpertSpec spec;
    spec.expert_id = doc.value("id", "");
    if (spec.expert_id.empty()) throw ConfigError("expert spec needs a non-empty id");
    spec.role = role_from(doc.value("role", "answerer"));

    if (!doc.contains("transport") || !doc["transport"].is_object()) {
        throw ConfigError("expert '" + spec.expert_id + "': transport object required");
    }
    const auto& tr = doc["transport"];
    std::string kind = tr.value("kind", "");
    if (kind == "remote") {
        RemoteTransportSpec remote;
        remote.endpoint = tr.value("endpoint", "");
        remote.model = tr.value("model", "");
        remote.credential_env = tr.value("credential_env", "");
        std::string mode = tr.value("image_mode", "url");
        if (mode == "url") remote.image_mode = ImageMode::Url;
        else if (mode == "base64") remote.image_mode = ImageMode::Base64;
        else throw ConfigError("expert '" + spec.expert_id + "': image_mode must be url or base64");
        if (remote.endpoint.empty()) {
            throw ConfigError("expert '" + spec.expert_id + "': remote transport needs endpoint");
        }
        spec.transport = std::move(remote);
    } else if (kind == "scripted") {
        ScriptedTransportSpec scripted;
        scripted.fixture_path = tr.value("fixture", "");
        if (scripted.fixture_path.empty()) {
            throw ConfigError("expert '" + spec.expert_id + "': scripted transport needs fixture");
        }
        spec.transport = std::move(scripted);
    } else {
        throw ConfigError("expert '" + spec.expert_id + "': transport kind must be remote or scripted");
    }

    if (auto it = doc.find("sampling"); it != doc.end()) {
        spec.sampling.temperature = it->value("temperature", spec.sampling.temperature);
        spec.sampling.top_p = it->value("top_p", spec.sampling.top_p);
    }
    if (spec.sampling.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (spec.sampling.top_p <= 0 || spec.sampling.top_p > 1) throw ConfigError("top_p must be in (0, 1]");

    if (auto it = doc.find("limits"); it != doc.end()) {
        spec.limits.timeout = std::chrono::milliseconds(it->value("timeout_ms", spec.limits.timeout.count()));
        spec.limits.max_retries = it->value("max_retries", spec.limits.max_retries);
        spec.limits.max_in_flight = it->value("max_in_flight", spec.limits.max_in_flight);
        spec.limits.retry_backoff = std::chrono::milliseconds(it->value("retry_backoff_ms", spec.limits.retry_backoff.count()));
    }
    if (spec.limits.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (spec.limits.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    return spec;
}

nlohmann::json expert_spec_to_json(const ExpertSpec& spec) {
    nlohmann::json tr;
    if (const auto* remote = std::get_if<RemoteTransportSpec>(&spec.transport)) {
        tr = {{"kind", "remote"},
              {"endpoint", remote->endpoint},
              {"model", remote->model},
              {"credential_env", remote->credential_env},
              {"image_mode", remote->image_mode == ImageMode::Url ? "url" : "base64"}};
    } else {
        tr = {{"kind", "scripted"},
              {"fixture", std::get<ScriptedTransportSpec>(spec.transport).fixture_path}};
    }
    return nlohmann::json{
        {"id", spec.expert_id},
        {"role", std::string(to_string(spec.role))},
        {"transport", tr},
        {"sampling", {{"temperature", spec.sampling.temperature}, {"top_p", spec.sampling.top_p}}},
        {"limits",
         {{"timeout_ms", spec.limits.timeout.count()},
          {"max_retries", spec.limits.max_retries},
          {"max_in_flight", spec.limits.max_in_flight},
          {"retry_backoff_ms", spec.limits.retry_backoff.count()}}},
    };
}

ExpertConfig load_expert_config(const std::string& path) {
    nlohmann::json doc = load_json_file(path);
    ExpertConfig cfg;
    if (auto it = doc.find("answerers"); it != doc.end()) {
        for (const auto& e : *it) cfg.answerers.push_back(expert_spec_from_json(e));
    }
    auto optional_spec = [&](const char* key, Role expected) -> std::optional<ExpertSpec> {
        auto it = doc.find(key);
        if (it == doc.end()) return std::nullopt;
        ExpertSpec spec = expert_spec_from_json(*it);
        if (spec.role != expected) {
            throw ConfigError(std::string(key) + " spec must have role " + std::string(to_string(expected)));
        }
        return spec;
    };
    cfg.querier = optional_spec("querier", Role::Querier);
    cfg.judge = optional_spec("judge", Role::Judge);
    if (auto it = doc.find("candidate"); it != doc.end()) {
        cfg.candidate = expert_spec_from_json(*it);
    }
    for (const auto& a : cfg.answerers) {
        if (a.role != Role::Answerer) {
            throw ConfigError("roster entry '" + a.expert_id + "' must have role answerer");
        }
    }
    return cfg;
}

std::string roster_digest(const std::vector<ExpertSpec>& specs) {
    std::uint64_t h = kFnvOffset;
    for (const auto& s : specs) {
        h = fnv1a64(expert_spec_to_json(s).dump(), h);
    }
    return to_hex(h);
}

}  // namespace prodkit::experts
