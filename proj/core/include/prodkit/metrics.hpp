#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prodkit/experts.hpp"

namespace prodkit::metrics {

/// Deterministic text -> token list rule. The rule id travels with every
/// report so scores are reproducible.
struct Tokenizer {
    std::string rule_id;
    std::function<std::vector<std::string>(std::string_view)> fn;

    std::vector<std::string> operator()(std::string_view s) const { return fn(s); }

    /// NFC, simple case fold, alphanumeric runs.
    static const Tokenizer& standard();
};

/// Clipped unigram precision times brevity penalty exp(min(0, 1 - r/c)).
/// Empty candidate scores 0.
double bleu1(std::string_view candidate, std::string_view reference, const Tokenizer& tok);

/// LCS-based F-score (beta = 1). Zero when either side is empty or no common
/// subsequence exists.
double rouge_l(std::string_view candidate, std::string_view reference, const Tokenizer& tok);

struct CiderResult {
    double score = 0.0;               // mean over pairs
    std::vector<double> per_pair;
    bool degenerate_idf = false;      // single-pair corpus: all idf collapse to 0
};

/// Corpus CIDEr, single reference per pair, no length penalty: per pair the
/// average over n = 1..4 of 10x cosine similarity between TF-IDF n-gram
/// vectors, with IDF computed over the reference set of this corpus.
CiderResult cider(std::span<const std::pair<std::string, std::string>> pairs, const Tokenizer& tok);

/// Fraction of keywords present in the candidate under the case-insensitive
/// word-boundary phrase rule. An empty keyword list is vacuously 1.
double keyword_recall(std::string_view candidate, std::span<const std::string> keywords);

using JudgeFn = std::function<experts::JudgeVerdict(
    std::string_view attr_name, std::string_view reference, std::string_view candidate)>;

struct AcPrediction {
    bool flag_incorrect = false;
    std::optional<std::string> proposed_value;
};

struct AcGold {
    bool is_correct = true;
    std::string attr_name;
    std::string correct_value;
};

struct AcScores {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double correction_accuracy = 0.0;  // over corrupted samples only
    std::uint64_t corrupted = 0;
    std::uint64_t unscored = 0;  // judge unreachable; excluded from the CAcc denominator
};

/// Precision/recall/F1 over the incorrect-flag decision (positive class:
/// "attribute is incorrect") plus correction accuracy: among corrupted
/// samples, the fraction flagged AND whose proposed value the judge deems
/// equivalent to the true one. Throws std::invalid_argument on a length
/// mismatch.
AcScores ac_metrics(std::span<const AcPrediction> predictions, std::span<const AcGold> golds,
                    const JudgeFn& judge);

struct RejectionScores {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
};

/// Refusal-ability scores with refusal as the positive class: accuracy is
/// the fraction where refused == is_unknown. Throws std::invalid_argument on
/// a length mismatch.
RejectionScores rejection_metrics(const std::vector<bool>& refused, const std::vector<bool>& is_unknown);

/// A reply refuses iff its extracted value case-insensitively equals
/// "unknown" or the reply matches one of the configured refusal phrases.
struct RefusalDetector {
    std::vector<std::string> phrases{"not sure", "cannot determine"};
    bool is_refusal(std::string_view reply) const;
};

struct AiGold {
    std::string attr_name;
    std::string value;
    bool is_unknown = false;
};

struct JudgedAccuracy {
    double accuracy = 0.0;  // mean over scored samples
    std::uint64_t scored = 0;
    std::uint64_t unscored = 0;  // judge transport failures
    std::uint64_t refusals = 0;  // predictions the detector classified as refusals
    std::vector<bool> per_sample_correct;  // false for unscored samples
    std::vector<bool> per_sample_scored;
};

/// Judge-equivalence accuracy for attribute inference. Per sample the
/// bracketed value (or the full reply) is judged against the gold value;
/// "Unknown" golds count correct iff the reply is a refusal.
JudgedAccuracy judged_accuracy(std::span<const std::string> predictions,
                               std::span<const AiGold> golds, const JudgeFn& judge,
                               const RefusalDetector& detector);

struct CmcGold {
    std::size_t option_index = 1;  // 1-based
    std::string label;
};

/// A prediction is correct iff its extracted value contains the gold option
/// number as a standalone digit run or case-insensitively equals the label.
double cmc_accuracy(std::span<const std::string> predictions, std::span<const CmcGold> golds);

/// Per-task metric bundle. `values` keeps canonical metric names (Bleu1,
/// ROUGE_L, CIDEr, Rec, Acc, F1, Prec, CAcc); `meta` carries the tokenizer
/// rule, judge usage and degeneracy flags.
struct MetricReport {
    std::string task;
    std::uint64_t samples = 0;
    std::map<std::string, double> values;
    nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json report_to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& doc);

/// First bracketed value when present, otherwise the trimmed full reply.
std::string extract_answer(std::string_view reply);

}  // namespace prodkit::metrics
