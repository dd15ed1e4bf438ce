#include "prodkit/metrics.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/templates.hpp"
#include "prodkit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace prodkit::metrics {

const Tokenizer& Tokenizer::standard() {
    static const Tokenizer tok{std::string(text::kTokenizerRuleId),
                               [](std::string_view s) { return text::tokenize(s); }};
    return tok;
}

double bleu1(std::string_view candidate, std::string_view reference, const Tokenizer& tok) {
    auto cand = tok(candidate);
    auto ref = tok(reference);
    if (cand.empty()) return 0.0;

    std::unordered_map<std::string, std::size_t> ref_counts;
    for (const auto& t : ref) ++ref_counts[t];

    std::unordered_map<std::string, std::size_t> cand_counts;
    for (const auto& t : cand) ++cand_counts[t];

    std::size_t clipped = 0;
    for (const auto& [token, count] : cand_counts) {
        auto it = ref_counts.find(token);
        if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }

    double precision = static_cast<double>(clipped) / static_cast<double>(cand.size());
    double ratio = static_cast<double>(ref.size()) / static_cast<double>(cand.size());
    double brevity = std::exp(std::min(0.0, 1.0 - ratio));
    return precision * brevity;
}

namespace {

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

double rouge_l(std::string_view candidate, std::string_view reference, const Tokenizer& tok) {
    auto cand = tok(candidate);
    auto ref = tok(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) return 0.0;
    double precision = lcs / static_cast<double>(cand.size());
    double recall = lcs / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

constexpr int kMaxNgram = 4;

using NgramCounts = std::unordered_map<std::string, std::size_t>;

std::array<NgramCounts, kMaxNgram> ngram_counts(const std::vector<std::string>& tokens) {
    std::array<NgramCounts, kMaxNgram> out;
    for (int n = 1; n <= kMaxNgram; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        auto& counts = out[static_cast<std::size_t>(n - 1)];
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
            std::string gram;
            for (int k = 0; k < n; ++k) {
                if (k > 0) gram.push_back('\x1f');
                gram += tokens[i + static_cast<std::size_t>(k)];
            }
            ++counts[gram];
        }
    }
    return out;
}

}  // namespace

CiderResult cider(std::span<const std::pair<std::string, std::string>> pairs, const Tokenizer& tok) {
    if (pairs.empty()) throw std::invalid_argument("cider needs at least one pair");

    CiderResult result;
    result.degenerate_idf = pairs.size() == 1;

    std::vector<std::array<NgramCounts, kMaxNgram>> cand_grams, ref_grams;
    cand_grams.reserve(pairs.size());
    ref_grams.reserve(pairs.size());
    for (const auto& [cand, ref] : pairs) {
        cand_grams.push_back(ngram_counts(tok(cand)));
        ref_grams.push_back(ngram_counts(tok(ref)));
    }

    // Document frequency over the reference set of this corpus.
    std::array<NgramCounts, kMaxNgram> df;
    for (const auto& grams : ref_grams) {
        for (int n = 0; n < kMaxNgram; ++n) {
            for (const auto& [gram, count] : grams[static_cast<std::size_t>(n)]) {
                ++df[static_cast<std::size_t>(n)][gram];
            }
        }
    }

    const double log_corpus = std::log(static_cast<double>(pairs.size()));
    auto idf = [&](int n, const std::string& gram) {
        auto it = df[static_cast<std::size_t>(n)].find(gram);
        double freq = it == df[static_cast<std::size_t>(n)].end()
                          ? 1.0
                          : static_cast<double>(std::max<std::size_t>(1, it->second));
        return log_corpus - std::log(freq);
    };

    result.per_pair.reserve(pairs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double pair_score = 0.0;
        for (int n = 0; n < kMaxNgram; ++n) {
            const auto& cg = cand_grams[i][static_cast<std::size_t>(n)];
            const auto& rg = ref_grams[i][static_cast<std::size_t>(n)];

            double dot = 0.0, cand_norm = 0.0, ref_norm = 0.0;
            for (const auto& [gram, count] : cg) {
                double w = static_cast<double>(count) * idf(n, gram);
                cand_norm += w * w;
                auto it = rg.find(gram);
                if (it != rg.end()) {
                    dot += w * static_cast<double>(it->second) * idf(n, gram);
                }
            }
            for (const auto& [gram, count] : rg) {
                double w = static_cast<double>(count) * idf(n, gram);
                ref_norm += w * w;
            }
            if (cand_norm > 0.0 && ref_norm > 0.0) {
                pair_score += 10.0 * dot / (std::sqrt(cand_norm) * std::sqrt(ref_norm));
            }
        }
        pair_score /= kMaxNgram;
        result.per_pair.push_back(pair_score);
        total += pair_score;
    }
    result.score = total / static_cast<double>(pairs.size());
    return result;
}

double keyword_recall(std::string_view candidate, std::span<const std::string> keywords) {
    if (keywords.empty()) return 1.0;  // vacuous
    std::size_t present = 0;
    for (const auto& kw : keywords) {
        if (text::contains_phrase(candidate, kw)) ++present;
    }
    return static_cast<double>(present) / static_cast<double>(keywords.size());
}

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double precision, double recall) {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

}  // namespace

AcScores ac_metrics(std::span<const AcPrediction> predictions, std::span<const AcGold> golds,
                    const JudgeFn& judge) {
    if (predictions.size() != golds.size()) {
        throw std::invalid_argument("ac_metrics: prediction/gold length mismatch");
    }

    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::uint64_t corrected = 0;
    AcScores scores;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const bool gold_incorrect = !golds[i].is_correct;
        const bool flagged = predictions[i].flag_incorrect;
        if (flagged && gold_incorrect) ++tp;
        if (flagged && !gold_incorrect) ++fp;
        if (!flagged && gold_incorrect) ++fn;

        if (gold_incorrect) {
            ++scores.corrupted;
            if (flagged && predictions[i].proposed_value) {
                auto verdict = judge(golds[i].attr_name, golds[i].correct_value,
                                     *predictions[i].proposed_value);
                if (verdict.transport_failed) {
                    ++scores.unscored;
                } else if (verdict.equivalent) {
                    ++corrected;
                }
            }
        }
    }

    scores.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    scores.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    scores.f1 = f1_of(scores.precision, scores.recall);
    scores.correction_accuracy = safe_div(static_cast<double>(corrected),
                                          static_cast<double>(scores.corrupted - scores.unscored));
    return scores;
}

RejectionScores rejection_metrics(const std::vector<bool>& refused,
                                  const std::vector<bool>& is_unknown) {
    if (refused.size() != is_unknown.size()) {
        throw std::invalid_argument("rejection_metrics: prediction/gold length mismatch");
    }
    std::uint64_t tp = 0, fp = 0, fn = 0, agree = 0;
    for (std::size_t i = 0; i < refused.size(); ++i) {
        if (refused[i] == is_unknown[i]) ++agree;
        if (refused[i] && is_unknown[i]) ++tp;
        if (refused[i] && !is_unknown[i]) ++fp;
        if (!refused[i] && is_unknown[i]) ++fn;
    }
    RejectionScores s;
    s.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    s.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    s.f1 = f1_of(s.precision, s.recall);
    s.accuracy = refused.empty() ? 0.0
                                 : static_cast<double>(agree) / static_cast<double>(refused.size());
    return s;
}

std::string extract_answer(std::string_view reply) {
    auto values = extract_bracketed(reply);
    if (!values.empty()) return text::trim(values.front());
    return text::trim(reply);
}

bool RefusalDetector::is_refusal(std::string_view reply) const {
    std::string extracted = text::fold(extract_answer(reply));
    if (extracted == "unknown") return true;
    for (const auto& phrase : phrases) {
        if (text::contains_fold(reply, phrase)) return true;
    }
    return false;
}

JudgedAccuracy judged_accuracy(std::span<const std::string> predictions,
                               std::span<const AiGold> golds, const JudgeFn& judge,
                               const RefusalDetector& detector) {
    if (predictions.size() != golds.size()) {
        throw std::invalid_argument("judged_accuracy: prediction/gold length mismatch");
    }

    JudgedAccuracy out;
    out.per_sample_correct.resize(golds.size(), false);
    out.per_sample_scored.resize(golds.size(), true);
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const bool refusal = detector.is_refusal(predictions[i]);
        if (refusal) ++out.refusals;

        if (golds[i].is_unknown) {
            ++out.scored;
            if (refusal) {
                ++correct;
                out.per_sample_correct[i] = true;
            }
            continue;
        }

        std::string answer = extract_answer(predictions[i]);
        auto verdict = judge(golds[i].attr_name, golds[i].value, answer);
        if (verdict.transport_failed) {
            ++out.unscored;
            out.per_sample_scored[i] = false;
            continue;
        }
        ++out.scored;
        if (verdict.equivalent) {
            ++correct;
            out.per_sample_correct[i] = true;
        }
    }
    out.accuracy = out.scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(out.scored);
    return out;
}

double cmc_accuracy(std::span<const std::string> predictions, std::span<const CmcGold> golds) {
    if (predictions.size() != golds.size()) {
        throw std::invalid_argument("cmc_accuracy: prediction/gold length mismatch");
    }
    if (golds.empty()) return 0.0;

    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        std::string answer = extract_answer(predictions[i]);
        std::string wanted = std::to_string(golds[i].option_index);

        bool hit = false;
        for (std::size_t p = 0; p < answer.size() && !hit;) {
            if (std::isdigit(static_cast<unsigned char>(answer[p]))) {
                std::size_t e = p;
                while (e < answer.size() && std::isdigit(static_cast<unsigned char>(answer[e]))) ++e;
                hit = answer.substr(p, e - p) == wanted;
                p = e;
            } else {
                ++p;
            }
        }
        if (!hit && text::fold(text::trim(answer)) == text::fold(golds[i].label)) hit = true;
        if (hit) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(golds.size());
}

nlohmann::json report_to_json(const MetricReport& r) {
    return nlohmann::json{
        {"task", r.task},
        {"samples", r.samples},
        {"values", r.values},
        {"meta", r.meta},
    };
}

MetricReport report_from_json(const nlohmann::json& doc) {
    MetricReport r;
    r.task = doc.at("task").get<std::string>();
    r.samples = doc.value("samples", 0ULL);
    if (auto it = doc.find("values"); it != doc.end()) {
        for (const auto& [k, v] : it->items()) r.values[k] = v.get<double>();
    }
    r.meta = doc.value("meta", nlohmann::json::object());
    return r;
}

}  // namespace prodkit::metrics
