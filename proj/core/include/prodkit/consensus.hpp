#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodkit/corpus.hpp"
#include "prodkit/experts.hpp"

namespace prodkit::consensus {

/// The answering roster: an ordered list of answerer specs with unique ids.
struct ExpertRoster {
    std::vector<experts::ExpertSpec> answerers;

    void validate() const;  // throws ConfigError
    std::size_t size() const { return answerers.size(); }
};

/// One expert's contribution to a verdict: did the judge deem its answer
/// equivalent to the original value, and how did the call end.
struct Agreement {
    std::string expert_id;
    bool agrees = false;
    experts::AnswerStatus status = experts::AnswerStatus::TransportError;
    bool judge_unparsed = false;
    bool judge_failed = false;
};

enum class Decision { Keep, Filter };
std::string_view to_string(Decision d);

/// Consensus outcome for one attribute pair: the generated question, the
/// per-expert agreement bits, the score s = (# agreeing) / |roster|, and the
/// keep/filter decision at threshold epsilon (kept when score >= epsilon).
struct AttributeVerdict {
    std::string product_id;
    AttributePair attr;
    std::size_t attr_index = 0;
    std::string question;
    std::string question_source;  // model | model_retry | fallback
    std::vector<Agreement> agreements;
    double score = 0.0;
    double epsilon = 0.6;
    Decision decision = Decision::Filter;
    bool indeterminate = false;
    std::string indeterminate_reason;
};

nlohmann::json verdict_to_json(const AttributeVerdict& v);

enum class CapMode { OriginalOrder, SeededRandom };
std::string_view to_string(CapMode m);
CapMode cap_mode_from(std::string_view s);

struct FilterRunConfig {
    double epsilon = 0.6;
    std::optional<std::size_t> attribute_cap;  // survivors (kept + Unknown-designated) per record
    CapMode cap_mode = CapMode::OriginalOrder;
    int concurrency = 1;
    std::uint64_t seed = 0;

    void validate() const;  // 0 < epsilon <= 1, concurrency >= 1
};

/// Consensus score: (# true) / roster_size. Non-ok expert statuses must
/// already be folded in as false; the divisor is always the full roster
/// size. Throws std::invalid_argument on an empty roster or a size mismatch.
double score_attribute(const std::vector<bool>& agreements, std::size_t roster_size);

/// Keep iff score >= epsilon. The boundary is kept: three of five experts at
/// epsilon 0.6 is the canonical "remains" case.
Decision decide(double score, double epsilon);

/// Full consensus pass for one attribute: question generation, roster
/// fan-out, per-answer judging, scoring. Marked indeterminate (excluded from
/// keep and filter outputs) when the querier is unreachable or more than
/// half the roster ends in transport errors.
AttributeVerdict verdict_for(const ProductRecord& record, const AttributePair& attr,
                             std::size_t attr_index, const ExpertRoster& roster,
                             const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                             experts::ExpertGateway& gateway, const FilterRunConfig& config);

struct FilterCounts {
    std::uint64_t records_in = 0;
    std::uint64_t records_out = 0;
    std::uint64_t records_dropped = 0;  // zero kept attributes after filtering/capping
    std::uint64_t attributes_in = 0;
    std::uint64_t kept = 0;
    std::uint64_t filtered = 0;
    std::uint64_t indeterminate = 0;
    std::uint64_t capped_out = 0;  // survivors removed by the per-record cap
};

struct FilterSinks {
    std::function<void(const ProductRecord&)> clean;
    std::function<void(const AttributeVerdict&)> filtered;
    std::function<void(const AttributeVerdict&)> indeterminate;
};

/// Streams records through the consensus filter. Clean records carry only
/// kept attributes plus the filtered attribute names needed downstream for
/// "Unknown" samples. Output order follows input order with attributes in
/// index order, so runs are byte-reproducible with scripted experts.
FilterCounts filter_corpus(const std::function<std::optional<ProductRecord>()>& source,
                           const ExpertRoster& roster, const experts::ExpertSpec& querier,
                           const experts::ExpertSpec& judge, experts::ExpertGateway& gateway,
                           const FilterRunConfig& config, const FilterSinks& sinks);

struct FilterOutputs {
    std::vector<ProductRecord> clean;
    std::vector<AttributeVerdict> filtered;
    std::vector<AttributeVerdict> indeterminate;
    FilterCounts counts;
};

FilterOutputs filter_corpus(std::span<const ProductRecord> records, const ExpertRoster& roster,
                            const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                            experts::ExpertGateway& gateway, const FilterRunConfig& config);

/// Audit manifest for a filter run: config, roster digest, seed, counts.
nlohmann::json run_manifest(const FilterRunConfig& config, const ExpertRoster& roster,
                            const experts::ExpertSpec& querier, const experts::ExpertSpec& judge,
                            const FilterCounts& counts);

}  // namespace prodkit::consensus
