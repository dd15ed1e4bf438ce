#include "prodkit/consensus.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

namespace prodkit::consensus {

using experts::AnswerStatus;

void ExpertRoster::validate() const {
    if (answerers.empty()) throw ConfigError("roster needs at least one answering expert");
    std::set<std::string_view> ids;
    for (const auto& spec : answerers) {
        if (spec.role != experts::Role::Answerer) {
            throw ConfigError("roster entry '" + spec.expert_id + "' is not an answerer");
        }
        if (!ids.insert(spec.expert_id).second) {
            throw ConfigError("duplicate expert id in roster: " + spec.expert_id);
        }
    }
}

std::string_view to_string(Decision d) { return d == Decision::Keep ? "keep" : "filter"; }

std::string_view to_string(CapMode m) {
    return m == CapMode::OriginalOrder ? "original_order" : "seeded_random";
}

CapMode cap_mode_from(std::string_view s) {
    if (s == "original_order") return CapMode::OriginalOrder;
    if (s == "seeded_random") return CapMode::SeededRandom;
    throw ConfigError("unknown cap mode: " + std::string(s));
}

void FilterRunConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in (0, 1]");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (attribute_cap && *attribute_cap == 0) throw ConfigError("attribute cap must be >= 1");
}

double score_attribute(const std::vector<bool>& agreements, std::size_t roster_size) {
    if (roster_size == 0) throw std::invalid_argument("roster_size must be positive");
    if (agreements.size() != roster_size) {
        throw std::invalid_argument("agreement count must equal roster size");
    }
    std::size_t agreeing = 0;
    for (bool a : agreements) agreeing += a ? 1 : 0;
    return static_cast<double>(agreeing) / static_cast<double>(roster_size);
}

Decision decide(double score, double epsilon) {
    return score >= epsilon ? Decision::Keep : Decision::Filter;
}

nlohmann::json verdict_to_json(const AttributeVerdict& v) {
    nlohmann::json agreements = nlohmann::json::array();
    for (const auto& a : v.agreements) {
        nlohmann::json entry{
            {"expert", a.expert_id},
            {"agrees", a.agrees},
            {"status", std::string(to_string(a.status))},
        };
        if (a.judge_unparsed) entry["judge_unparsed"] = true;
        if (a.judge_failed) entry["judge_failed"] = true;
        agreements.push_back(std::move(entry));
    }
    nlohmann::json doc{
        {"product_id", v.product_id},
        {"attr_index", v.attr_index},
        {"name", v.attr.name},
        {"value", v.attr.value},
        {"question", v.question},
        {"question_source", v.question_source},
        {"agreements", agreements},
        {"score", v.score},
        {"epsilon", v.epsilon},
        {"decision", std::string(to_string(v.decision))},
    };
    if (v.indeterminate) {
        doc["indeterminate"] = true;
        doc["indeterminate_reason"] = v.indeterminate_reason;
    }
    return doc;
}

namespace {

std::string_view source_name(experts::GeneratedQuestion::Source s) {
    using Source = experts::GeneratedQuestion::Source;
    switch (s) {
        case Source::Model: return "model";
        case Source::ModelRetry: return "model_retry";
        case Source::Fallback: return "fallback";
    }
    return "?";
}

}  // namespace

AttributeVerdict verdict_for(const ProductRecord& record, const AttributePair& attr,
                             std::size_t attr_index, const ExpertRoster& roster,
                             const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                             experts::ExpertGateway& gateway, const FilterRunConfig& config) {
    AttributeVerdict verdict;
    verdict.product_id = record.id;
    verdict.attr = attr;
    verdict.attr_index = attr_index;
    verdict.epsilon = config.epsilon;

    auto question = gateway.generate_question(querier, record.caption, attr);
    if (question.transport_failed) {
        verdict.indeterminate = true;
        verdict.indeterminate_reason = "querier_unreachable";
        return verdict;
    }
    verdict.question = question.question;
    verdict.question_source = std::string(source_name(question.source));

    std::vector<bool> bits;
    bits.reserve(roster.size());
    std::size_t transport_failures = 0;

    for (const auto& spec : roster.answerers) {
        Agreement agreement;
        agreement.expert_id = spec.expert_id;

        auto answer = gateway.ask_expert(spec, record.image_ref, record.caption, verdict.question);
        agreement.status = answer.status;

        if (answer.status == AnswerStatus::Ok) {
            auto j = gateway.judge_equivalence(judge, attr.name, attr.value, answer.answer_text);
            if (j.transport_failed) {
                // An unreachable judge is indistinguishable from a lost
                // answer for quorum purposes.
                agreement.judge_failed = true;
                ++transport_failures;
            } else {
                agreement.agrees = j.equivalent;
                agreement.judge_unparsed = j.unparsed;
            }
        } else if (answer.status == AnswerStatus::Timeout ||
                   answer.status == AnswerStatus::TransportError) {
            ++transport_failures;
        }
        // Refusals and failures count as disagreement: Eq. 1 divides by the
        // fixed roster size, never by the number of usable answers.
        bits.push_back(agreement.agrees);
        verdict.agreements.push_back(std::move(agreement));
    }

    if (transport_failures * 2 > roster.size()) {
        verdict.indeterminate = true;
        verdict.indeterminate_reason = "transport_quorum";
    }

    verdict.score = score_attribute(bits, roster.size());
    verdict.decision = decide(verdict.score, config.epsilon);
    return verdict;
}

namespace {

std::vector<AttributeVerdict> verdicts_for_record(const ProductRecord& record,
                                                  const ExpertRoster& roster,
                                                  const experts::ExpertSpec& querier,
                                                  const experts::ExpertSpec& judge,
                                                  experts::ExpertGateway& gateway,
                                                  const FilterRunConfig& config) {
    const std::size_t n = record.attributes.size();
    std::vector<AttributeVerdict> verdicts(n);

    const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), n);
    if (width <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            verdicts[i] = verdict_for(record, record.attributes[i], i, roster, querier, judge,
                                      gateway, config);
        }
        return verdicts;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(width);
    for (std::size_t w = 0; w < width; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                verdicts[i] = verdict_for(record, record.attributes[i], i, roster, querier, judge,
                                          gateway, config);
            }
        });
    }
    for (auto& t : workers) t.join();
    return verdicts;
}

struct SurvivorUnit {
    std::size_t attr_index;
    bool kept;  // false: filtered, designated Unknown downstream
};

}  // namespace

FilterCounts filter_corpus(const std::function<std::optional<ProductRecord>()>& source,
                           const ExpertRoster& roster, const experts::ExpertSpec& querier,
                           const experts::ExpertSpec& judge, experts::ExpertGateway& gateway,
                           const FilterRunConfig& config, const FilterSinks& sinks) {
    roster.validate();
    config.validate();

    FilterCounts counts;
    while (auto record = source()) {
        ++counts.records_in;
        counts.attributes_in += record->attributes.size();

        auto verdicts = verdicts_for_record(*record, roster, querier, judge, gateway, config);

        std::vector<SurvivorUnit> survivors;
        for (const auto& v : verdicts) {
            if (v.indeterminate) {
                ++counts.indeterminate;
                if (sinks.indeterminate) sinks.indeterminate(v);
                continue;
            }
            if (v.decision == Decision::Keep) {
                ++counts.kept;
                survivors.push_back({v.attr_index, true});
            } else {
                ++counts.filtered;
                if (sinks.filtered) sinks.filtered(v);
                survivors.push_back({v.attr_index, false});
            }
        }

        if (config.attribute_cap && survivors.size() > *config.attribute_cap) {
            const std::size_t cap = *config.attribute_cap;
            if (config.cap_mode == CapMode::SeededRandom) {
                auto rng = SeededRng(config.seed).ns("cap").ns(record->id);
                auto chosen = rng.sample_without_replacement(survivors.size(), cap);
                std::sort(chosen.begin(), chosen.end());
                std::vector<SurvivorUnit> capped;
                capped.reserve(cap);
                for (auto idx : chosen) capped.push_back(survivors[idx]);
                counts.capped_out += survivors.size() - capped.size();
                survivors = std::move(capped);
            } else {
                counts.capped_out += survivors.size() - cap;
                survivors.resize(cap);
            }
        }

        ProductRecord clean;
        clean.id = record->id;
        clean.image_ref = record->image_ref;
        clean.caption = record->caption;
        clean.category_path = record->category_path;
        for (const auto& unit : survivors) {
            if (unit.kept) {
                clean.attributes.push_back(record->attributes[unit.attr_index]);
            } else {
                clean.filtered_attribute_names.push_back(record->attributes[unit.attr_index].name);
            }
        }

        if (clean.attributes.empty()) {
            // Nothing left to train on; the record survives only in the logs.
            ++counts.records_dropped;
            continue;
        }
        ++counts.records_out;
        if (sinks.clean) sinks.clean(clean);
    }
    return counts;
}

FilterOutputs filter_corpus(std::span<const ProductRecord> records, const ExpertRoster& roster,
                            const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                            experts::ExpertGateway& gateway, const FilterRunConfig& config) {
    FilterOutputs out;
    std::size_t i = 0;
    FilterSinks sinks{
        [&](const ProductRecord& r) { out.clean.push_back(r); },
        [&](const AttributeVerdict& v) { out.filtered.push_back(v); },
        [&](const AttributeVerdict& v) { out.indeterminate.push_back(v); },
    };
    out.counts = filter_corpus(
        [&]() -> std::optional<ProductRecord> {
            if (i >= records.size()) return std::nullopt;
            return records[i++];
        },
        roster, querier, judge, gateway, config, sinks);
    return out;
}

nlohmann::json run_manifest(const FilterRunConfig& config, const ExpertRoster& roster,
                            const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                            const FilterCounts& counts) {
    nlohmann::json roster_ids = nlohmann::json::array();
    for (const auto& s : roster.answerers) roster_ids.push_back(s.expert_id);
    nlohmann::json doc{
        {"epsilon", config.epsilon},
        {"cap_mode", std::string(to_string(config.cap_mode))},
        {"concurrency", config.concurrency},
        {"seed", config.seed},
        {"roster", roster_ids},
        {"roster_digest", experts::roster_digest(roster.answerers)},
        {"querier", querier.expert_id},
        {"judge", judge.expert_id},
        {"counts",
         {{"records_in", counts.records_in},
          {"records_out", counts.records_out},
          {"records_dropped", counts.records_dropped},
          {"attributes_in", counts.attributes_in},
          {"kept", counts.kept},
          {"filtered", counts.filtered},
          {"indeterminate", counts.indeterminate},
          {"capped_out", counts.capped_out}}},
    };
    if (config.attribute_cap) doc["attribute_cap"] = *config.attribute_cap;
    return doc;
}

}  // namespace prodkit::consensus
