#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "prodkit/corpus.hpp"
#include "prodkit/templates.hpp"

namespace prodkit::experts {

enum class Role { Answerer, Querier, Judge };

std::string_view to_string(Role r);
Role role_from(std::string_view s);

struct Sampling {
    double temperature = 0.9;  // baseline defaults for expert and candidate endpoints
    double top_p = 0.2;
};

struct Limits {
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;
    int max_in_flight = 4;
    std::chrono::milliseconds retry_backoff{100};
};

enum class ImageMode { Url, Base64 };

struct RemoteTransportSpec {
    std::string endpoint;        // full URL of a chat-completion endpoint
    std::string model;
    std::string credential_env;  // env var holding the bearer token; never inline
    ImageMode image_mode = ImageMode::Url;
};

struct ScriptedTransportSpec {
    std::string fixture_path;
};

/// One roster entry. Answerer specs accept image inputs; querier and judge
/// specs are text-only.
struct ExpertSpec {
    std::string expert_id;
    Role role = Role::Answerer;
    std::variant<RemoteTransportSpec, ScriptedTransportSpec> transport;
    Sampling sampling;
    Limits limits;

    bool accepts_images() const { return role == Role::Answerer; }
};

ExpertSpec expert_spec_from_json(const nlohmann::json& doc);
nlohmann::json expert_spec_to_json(const ExpertSpec& spec);

/// Roster document: the answering experts plus the querier, judge, and an
/// optional benchmark candidate.
struct ExpertConfig {
    std::vector<ExpertSpec> answerers;
    std::optional<ExpertSpec> querier;
    std::optional<ExpertSpec> judge;
    std::optional<ExpertSpec> candidate;
};

ExpertConfig load_expert_config(const std::string& path);

enum class AnswerStatus { Ok, Timeout, Refused, TransportError };

std::string_view to_string(AnswerStatus s);
AnswerStatus answer_status_from(std::string_view s);

struct ExpertAnswer {
    std::string expert_id;
    std::string question;
    std::string answer_text;  // non-empty iff status == Ok
    AnswerStatus status = AnswerStatus::TransportError;
    std::chrono::milliseconds latency{0};
    int attempts = 1;
};

struct JudgeVerdict {
    bool equivalent = false;
    bool unparsed = false;          // reply never parsed as yes/no, counted as disagreement
    bool transport_failed = false;  // judge unreachable; callers mark the sample unscored
};

struct GeneratedQuestion {
    enum class Source { Model, ModelRetry, Fallback };
    std::string question;
    Source source = Source::Model;
    bool transport_failed = false;
};

struct ChatRequest {
    std::string expert_id;
    std::optional<std::string> image_ref;
    std::string prompt;
    Sampling sampling;
    std::chrono::milliseconds timeout{30000};
};

struct ChatReply {
    AnswerStatus status = AnswerStatus::TransportError;
    std::string text;
    bool retryable = true;  // only consulted for Timeout/TransportError
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual ChatReply send(const ChatRequest& req) = 0;
};

/// Offline transport: replies come from a fixture keyed by
/// (expert_id, content hash of the rendered prompt), so fixtures survive
/// template edits that keep rendered text identical. Missing keys map to
/// Refused. Deterministic and byte-stable across runs.
class ScriptedTransport : public Transport {
public:
    ScriptedTransport() = default;

    static std::shared_ptr<ScriptedTransport> from_json(const nlohmann::json& doc);
    static std::shared_ptr<ScriptedTransport> load_file(const std::string& path);

    void add(std::string_view expert_id, std::string_view prompt, std::string reply);
    void add_status(std::string_view expert_id, std::string_view prompt, AnswerStatus status);

    ChatReply send(const ChatRequest& req) override;

    nlohmann::json to_json() const;

    static std::string prompt_hash(std::string_view prompt);

    std::size_t size() const;

private:
    struct Entry {
        AnswerStatus status = AnswerStatus::Ok;
        std::string text;
        std::string expert_id;
        std::string hash;
    };

    void insert(Entry e);
    static std::string key(std::string_view expert_id, std::string_view hash);

    mutable std::mutex mu_;
    std::unordered_map<std::string, Entry> entries_;
};

/// HTTP JSON chat-completion transport (cpp-httplib backed).
std::shared_ptr<Transport> make_remote_transport(const RemoteTransportSpec& spec);

using TransportFactory = std::function<std::shared_ptr<Transport>(const ExpertSpec&)>;

struct GatewayCounters {
    std::int64_t calls = 0;
    std::int64_t retries = 0;
    std::int64_t failures = 0;  // terminal Timeout/TransportError replies
    int in_flight = 0;
    int peak_in_flight = 0;
    std::int64_t judge_cache_hits = 0;
};

/// Uniform access to the three expert roles over remote or scripted
/// transports. Safe for concurrent use: per-endpoint in-flight limits and
/// retry backoff are enforced here, and every returned value is immutable.
class ExpertGateway {
public:
    ExpertGateway();
    explicit ExpertGateway(TransportFactory factory);
    ~ExpertGateway();

    /// One answer from one expert, a_i = e_i(image, caption, question).
    /// Retries transient failures up to the spec's max_retries.
    ExpertAnswer ask_expert(const ExpertSpec& spec, const std::optional<std::string>& image_ref,
                            std::string_view context, std::string_view question);

    /// Sends an already-rendered prompt through the same limit/retry
    /// machinery. Used by the benchmark runner's evaluation prompts.
    ExpertAnswer ask_raw(const ExpertSpec& spec, const std::optional<std::string>& image_ref,
                         std::string prompt);

    /// Turns an attribute pair into a question about the value. If the
    /// generated text contains the value (case-insensitive substring) the
    /// querier is asked once more, then the deterministic fallback applies.
    GeneratedQuestion generate_question(const ExpertSpec& querier, std::string_view caption,
                                        const AttributePair& attr);

    /// Binary equivalence check via the answer-check prompt. A reply whose
    /// first alphabetic token is yes/no decides; anything else is re-asked
    /// once and then conservatively recorded as disagreement with the
    /// `unparsed` flag. Verdicts are cached by content hash.
    JudgeVerdict judge_equivalence(const ExpertSpec& judge, std::string_view attr_name,
                                   std::string_view reference, std::string_view candidate);

    GatewayCounters counters(std::string_view expert_id) const;

private:
    struct EndpointState;

    ChatReply dispatch(const ExpertSpec& spec, ChatRequest req);
    std::shared_ptr<Transport> transport_for(const ExpertSpec& spec);
    EndpointState& state_for(std::string_view expert_id);
    void state_for_cache_hit(std::string_view expert_id);

    TransportFactory factory_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<Transport>> transports_;
    std::unordered_map<std::string, std::unique_ptr<EndpointState>> states_;
    std::unordered_map<std::string, JudgeVerdict> judge_cache_;
};

/// Stable digest of a roster (ids + transports + sampling), recorded in
/// filter run manifests.
std::string roster_digest(const std::vector<ExpertSpec>& specs);

}  // namespace prodkit::experts
