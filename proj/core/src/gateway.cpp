#include "prodkit/experts.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/hash.hpp"
#include "prodkit/text.hpp"

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <thread>

namespace prodkit::experts {

namespace {

std::shared_ptr<Transport> default_factory(const ExpertSpec& spec) {
    if (const auto* scripted = std::get_if<ScriptedTransportSpec>(&spec.transport)) {
        return ScriptedTransport::load_file(scripted->fixture_path);
    }
    return make_remote_transport(std::get<RemoteTransportSpec>(spec.transport));
}

std::string first_alpha_token(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && !std::isalpha(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = b;
    while (e < s.size() && std::isalpha(static_cast<unsigned char>(s[e]))) ++e;
    return std::string(s.substr(b, e - b));
}

std::string strip_question_prefix(std::string q) {
    std::string folded = text::fold(q);
    constexpr std::string_view prefix = "question:";
    if (folded.rfind(prefix, 0) == 0) {
        return text::trim(q.substr(prefix.size()));
    }
    return q;
}

}  // namespace

struct ExpertGateway::EndpointState {
    std::mutex mu;
    std::condition_variable cv;
    GatewayCounters counters;

    struct Slot {
        EndpointState& state;
        explicit Slot(EndpointState& s, int max_in_flight) : state(s) {
            std::unique_lock lock(state.mu);
            state.cv.wait(lock, [&] { return state.counters.in_flight < max_in_flight; });
            ++state.counters.in_flight;
            state.counters.peak_in_flight =
                std::max(state.counters.peak_in_flight, state.counters.in_flight);
        }
        ~Slot() {
            {
                std::lock_guard lock(state.mu);
                --state.counters.in_flight;
            }
            state.cv.notify_one();
        }
    };
};

ExpertGateway::ExpertGateway() : factory_(default_factory) {}

ExpertGateway::ExpertGateway(TransportFactory factory) : factory_(std::move(factory)) {
    if (!factory_) factory_ = default_factory;
}

ExpertGateway::~ExpertGateway() = default;

std::shared_ptr<Transport> ExpertGateway::transport_for(const ExpertSpec& spec) {
    std::lock_guard lock(mu_);
    auto it = transports_.find(spec.expert_id);
    if (it != transports_.end()) return it->second;
    auto transport = factory_(spec);
    if (!transport) throw ConfigError("transport factory returned null for " + spec.expert_id);
    transports_.emplace(spec.expert_id, transport);
    return transport;
}

ExpertGateway::EndpointState& ExpertGateway::state_for(std::string_view expert_id) {
    std::lock_guard lock(mu_);
    auto it = states_.find(std::string(expert_id));
    if (it == states_.end()) {
        it = states_.emplace(std::string(expert_id), std::make_unique<EndpointState>()).first;
    }
    return *it->second;
}

ChatReply ExpertGateway::dispatch(const ExpertSpec& spec, ChatRequest req) {
    auto transport = transport_for(spec);
    auto& state = state_for(spec.expert_id);

    EndpointState::Slot slot(state, spec.limits.max_in_flight);
    {
        std::lock_guard lock(state.mu);
        ++state.counters.calls;
    }

    ChatReply reply;
    for (int attempt = 0;; ++attempt) {
        reply = transport->send(req);
        bool transient = reply.status == AnswerStatus::Timeout ||
                         reply.status == AnswerStatus::TransportError;
        if (!transient || !reply.retryable || attempt >= spec.limits.max_retries) break;
        {
            std::lock_guard lock(state.mu);
            ++state.counters.retries;
        }
        if (spec.limits.retry_backoff.count() > 0) {
            std::this_thread::sleep_for(spec.limits.retry_backoff);
        }
    }
    if (reply.status == AnswerStatus::Timeout || reply.status == AnswerStatus::TransportError) {
        std::lock_guard lock(state.mu);
        ++state.counters.failures;
    }
    return reply;
}

ExpertAnswer ExpertGateway::ask_expert(const ExpertSpec& spec,
                                       const std::optional<std::string>& image_ref,
                                       std::string_view context, std::string_view question) {
    if (image_ref && !spec.accepts_images()) {
        throw ConfigError("expert '" + spec.expert_id + "' (" + std::string(to_string(spec.role)) +
                          ") cannot take image inputs");
    }

    SlotMap slots{{"context", std::string(context)}, {"question", std::string(question)}};
    std::string prompt = render_prompt(prompts::answerer_context(), slots);
    ExpertAnswer answer = ask_raw(spec, image_ref, std::move(prompt));
    answer.question = std::string(question);
    return answer;
}

ExpertAnswer ExpertGateway::ask_raw(const ExpertSpec& spec,
                                    const std::optional<std::string>& image_ref,
                                    std::string prompt) {
    ChatRequest req;
    req.expert_id = spec.expert_id;
    req.image_ref = image_ref;
    req.prompt = std::move(prompt);
    req.sampling = spec.sampling;
    req.timeout = spec.limits.timeout;

    auto started = std::chrono::steady_clock::now();
    ChatReply reply = dispatch(spec, std::move(req));
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    ExpertAnswer answer;
    answer.expert_id = spec.expert_id;
    answer.status = reply.status;
    answer.latency = elapsed;
    if (reply.status == AnswerStatus::Ok) {
        answer.answer_text = text::trim(reply.text);
        if (answer.answer_text.empty()) answer.status = AnswerStatus::Refused;
    }
    return answer;
}

GeneratedQuestion ExpertGateway::generate_question(const ExpertSpec& querier,
                                                   std::string_view caption,
                                                   const AttributePair& attr) {
    if (querier.role != Role::Querier) {
        throw ConfigError("generate_question needs a querier spec, got " +
                          std::string(to_string(querier.role)));
    }

    SlotMap slots{{"caption", std::string(caption)},
                  {"attr_name", attr.name},
                  {"attr_value", attr.value}};
    std::string prompt = render_prompt(prompts::question_gen(), slots);

    GeneratedQuestion out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ExpertAnswer answer = ask_raw(querier, std::nullopt, prompt);
        if (answer.status == AnswerStatus::Timeout || answer.status == AnswerStatus::TransportError) {
            out.transport_failed = true;
            return out;
        }
        if (answer.status == AnswerStatus::Ok) {
            std::string question = strip_question_prefix(text::trim(answer.answer_text));
            if (!question.empty() && !text::contains_fold(question, attr.value)) {
                out.question = std::move(question);
                out.source = attempt == 0 ? GeneratedQuestion::Source::Model
                                          : GeneratedQuestion::Source::ModelRetry;
                return out;
            }
        }
        // Leaked the value or declined; ask once more, then fall back.
    }
    out.question = prompts::fallback_question(attr.name);
    out.source = GeneratedQuestion::Source::Fallback;
    return out;
}

JudgeVerdict ExpertGateway::judge_equivalence(const ExpertSpec& judge, std::string_view attr_name,
                                              std::string_view reference,
                                              std::string_view candidate) {
    if (judge.role != Role::Judge) {
        throw ConfigError("judge_equivalence needs a judge spec, got " +
                          std::string(to_string(judge.role)));
    }

    std::string cache_key;
    {
        std::uint64_t h = fnv1a64(judge.expert_id);
        h = fnv1a64(attr_name, h ^ 0x9e3779b97f4a7c15ULL);
        h = fnv1a64(reference, h);
        h = fnv1a64(candidate, h);
        cache_key = to_hex(h);
    }
    {
        std::lock_guard lock(mu_);
        if (auto it = judge_cache_.find(cache_key); it != judge_cache_.end()) {
            state_for_cache_hit(judge.expert_id);
            return it->second;
        }
    }

    SlotMap slots{{"attr_name", std::string(attr_name)},
                  {"reference", std::string(reference)},
                  {"candidate", std::string(candidate)}};
    std::string prompt = render_prompt(prompts::answer_check(), slots);

    JudgeVerdict verdict;
    bool decided = false;
    for (int attempt = 0; attempt < 2 && !decided; ++attempt) {
        ExpertAnswer answer = ask_raw(judge, std::nullopt, prompt);
        if (answer.status == AnswerStatus::Timeout || answer.status == AnswerStatus::TransportError) {
            verdict.transport_failed = true;
            return verdict;  // not cached: a later retry may succeed
        }
        if (answer.status == AnswerStatus::Ok) {
            std::string token = text::fold(first_alpha_token(answer.answer_text));
            if (token == "yes") {
                verdict.equivalent = true;
                decided = true;
            } else if (token == "no") {
                verdict.equivalent = false;
                decided = true;
            }
        }
        // Unparseable or refused: one re-ask, then conservative disagreement.
    }
    if (!decided) {
        verdict.equivalent = false;
        verdict.unparsed = true;
    }

    std::lock_guard lock(mu_);
    judge_cache_.emplace(std::move(cache_key), verdict);
    return verdict;
}

void ExpertGateway::state_for_cache_hit(std::string_view expert_id) {
    // mu_ already held by caller
    auto it = states_.find(std::string(expert_id));
    if (it == states_.end()) {
        it = states_.emplace(std::string(expert_id), std::make_unique<EndpointState>()).first;
    }
    std::lock_guard lock(it->second->mu);
    ++it->second->counters.judge_cache_hits;
}

GatewayCounters ExpertGateway::counters(std::string_view expert_id) const {
    std::lock_guard lock(mu_);
    auto it = states_.find(std::string(expert_id));
    if (it == states_.end()) return {};
    std::lock_guard state_lock(it->second->mu);
    return it->second->counters;
}

}  // namespace prodkit::experts
