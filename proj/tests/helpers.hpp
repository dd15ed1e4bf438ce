#pragma once

// Shared fixtures for the unit and acceptance suites: record factories and
// scripted expert worlds wired through the public prompt renderers, so test
// fixtures survive template changes exactly like on-disk ones do.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "prodkit/consensus.hpp"
#include "prodkit/corpus.hpp"
#include "prodkit/experts.hpp"
#include "prodkit/tasks.hpp"
#include "prodkit/templates.hpp"
#include "prodkit/text.hpp"

namespace testutil {

using namespace prodkit;
using experts::AnswerStatus;
using experts::ChatReply;
using experts::ChatRequest;
using experts::ExpertSpec;
using experts::Role;
using experts::ScriptedTransport;
using experts::Transport;

inline ProductRecord make_record(std::string id, std::string caption,
                                 std::vector<std::pair<std::string, std::string>> attrs,
                                 std::vector<std::string> category = {"Root", "Leaf"}) {
    ProductRecord r;
    r.id = std::move(id);
    r.image_ref = "img/" + r.id + ".jpg";
    r.caption = std::move(caption);
    r.category_path = std::move(category);
    for (auto& [n, v] : attrs) r.attributes.push_back({std::move(n), std::move(v)});
    return r;
}

inline ExpertSpec scripted_spec(std::string id, Role role) {
    ExpertSpec spec;
    spec.expert_id = std::move(id);
    spec.role = role;
    spec.transport = experts::ScriptedTransportSpec{"<in-memory>"};
    spec.limits.max_retries = 0;
    spec.limits.retry_backoff = std::chrono::milliseconds(0);
    return spec;
}

inline std::string answer_prompt(std::string_view caption, std::string_view question) {
    return render_prompt(prompts::answerer_context(),
                         {{"context", std::string(caption)}, {"question", std::string(question)}});
}

inline std::string question_prompt(std::string_view caption, const AttributePair& attr) {
    return render_prompt(prompts::question_gen(), {{"caption", std::string(caption)},
                                                   {"attr_name", attr.name},
                                                   {"attr_value", attr.value}});
}

inline std::string judge_prompt(std::string_view name, std::string_view ref, std::string_view cand) {
    return render_prompt(prompts::answer_check(), {{"attr_name", std::string(name)},
                                                   {"reference", std::string(ref)},
                                                   {"candidate", std::string(cand)}});
}

/// One shared scripted transport handed to every expert id.
struct ScriptedWorld {
    std::shared_ptr<ScriptedTransport> transport = std::make_shared<ScriptedTransport>();

    experts::TransportFactory factory() {
        auto t = transport;
        return [t](const ExpertSpec&) { return t; };
    }

    void script_question(const ExpertSpec& querier, std::string_view caption,
                         const AttributePair& attr, std::string question) {
        transport->add(querier.expert_id, question_prompt(caption, attr), std::move(question));
    }

    void script_answer(const ExpertSpec& answerer, std::string_view caption,
                       std::string_view question, std::string answer) {
        transport->add(answerer.expert_id, answer_prompt(caption, question), std::move(answer));
    }

    void script_answer_status(const ExpertSpec& answerer, std::string_view caption,
                              std::string_view question, AnswerStatus status) {
        transport->add_status(answerer.expert_id, answer_prompt(caption, question), status);
    }

    void script_judgement(const ExpertSpec& judge, std::string_view name, std::string_view ref,
                          std::string_view cand, bool equivalent) {
        transport->add(judge.expert_id, judge_prompt(name, ref, cand), equivalent ? "yes" : "no");
    }

    void script_judge_reply(const ExpertSpec& judge, std::string_view name, std::string_view ref,
                            std::string_view cand, std::string reply) {
        transport->add(judge.expert_id, judge_prompt(name, ref, cand), std::move(reply));
    }
};

/// Judge transport that answers yes iff reference == candidate after fold
/// and trim. Parses the rendered answer-check prompt.
class HonestJudgeTransport : public Transport {
public:
    ChatReply send(const ChatRequest& req) override {
        constexpr std::string_view ref_marker = "Reference attribute value: <";
        constexpr std::string_view cand_marker = "Candidate attribute value: <";
        auto ref_pos = req.prompt.find(ref_marker);
        auto cand_pos = req.prompt.find(cand_marker);
        if (ref_pos == std::string::npos || cand_pos == std::string::npos) {
            return {AnswerStatus::Refused, "", false};
        }
        auto ref_start = ref_pos + ref_marker.size();
        auto ref_end = req.prompt.find(">. ", ref_start);
        auto cand_start = cand_pos + cand_marker.size();
        auto cand_end = req.prompt.find(">.", cand_start);
        if (ref_end == std::string::npos || cand_end == std::string::npos) {
            return {AnswerStatus::Refused, "", false};
        }
        std::string ref = req.prompt.substr(ref_start, ref_end - ref_start);
        std::string cand = req.prompt.substr(cand_start, cand_end - cand_start);
        bool same = text::fold(text::trim(ref)) == text::fold(text::trim(cand));
        return {AnswerStatus::Ok, same ? "yes" : "no", false};
    }
};

/// Fails `failures` times with the given status, then succeeds.
class FlakyTransport : public Transport {
public:
    FlakyTransport(int failures, std::string reply, AnswerStatus failure_status = AnswerStatus::TransportError)
        : remaining_(failures), reply_(std::move(reply)), failure_status_(failure_status) {}

    ChatReply send(const ChatRequest&) override {
        if (remaining_.fetch_sub(1) > 0) return {failure_status_, "", true};
        return {AnswerStatus::Ok, reply_, false};
    }

private:
    std::atomic<int> remaining_;
    std::string reply_;
    AnswerStatus failure_status_;
};

/// Wraps another transport and counts sends.
class CountingTransport : public Transport {
public:
    explicit CountingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}

    ChatReply send(const ChatRequest& req) override {
        ++count_;
        return inner_->send(req);
    }

    std::int64_t count() const { return count_; }

private:
    std::shared_ptr<Transport> inner_;
    std::atomic<std::int64_t> count_{0};
};

/// Observes its own concurrency level.
class ConcurrencyProbeTransport : public Transport {
public:
    explicit ConcurrencyProbeTransport(std::chrono::milliseconds dwell) : dwell_(dwell) {}

    ChatReply send(const ChatRequest&) override {
        int now = ++active_;
        int seen = peak_.load();
        while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(dwell_);
        --active_;
        return {AnswerStatus::Ok, "ok", false};
    }

    int peak() const { return peak_.load(); }

private:
    std::chrono::milliseconds dwell_;
    std::atomic<int> active_{0};
    std::atomic<int> peak_{0};
};

/// The evaluation prompt a benchmark run will send for this sample.
inline std::string eval_prompt_for(const tasks::TaskSample& sample) {
    SlotMap slots;
    if (sample.meta.contains("slots")) {
        for (const auto& [k, v] : sample.meta["slots"].items()) {
            if (v.is_string()) slots[k] = v.get<std::string>();
        }
    }
    return render_prompt(prompts::eval_prompt(sample.task), slots);
}

inline void script_candidate_reply(ScriptedWorld& world, const ExpertSpec& candidate,
                                   const tasks::TaskSample& sample, std::string reply) {
    world.transport->add(candidate.expert_id, eval_prompt_for(sample), std::move(reply));
}

/// Scripts the candidate to echo each sample's gold assistant text.
inline void script_candidate_echo(ScriptedWorld& world, const ExpertSpec& candidate,
                                  const std::map<TaskKind, std::vector<tasks::TaskSample>>& sets) {
    for (const auto& [kind, samples] : sets) {
        for (const auto& s : samples) script_candidate_reply(world, candidate, s, s.assistant_text);
    }
}

}  // namespace testutil
