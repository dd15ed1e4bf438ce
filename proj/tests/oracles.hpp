#pragma once

// Brute-force reference implementations, written independently of
// core/src/metrics.cpp and kept deliberately naive. They operate on token
// vectors directly so the comparison isolates the metric math from the
// tokenizer.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

// Unigram-clipped precision times brevity penalty, computed by erasing
// matches from a mutable reference copy.
inline double bleu1(const Tokens& cand, const Tokens& ref) {
    if (cand.empty()) return 0.0;
    std::vector<std::string> remaining(ref);
    std::size_t matched = 0;
    for (const auto& token : cand) {
        auto it = std::find(remaining.begin(), remaining.end(), token);
        if (it != remaining.end()) {
            remaining.erase(it);
            ++matched;
        }
    }
    double precision = double(matched) / double(cand.size());
    double bp = 1.0;
    if (ref.size() > cand.size()) {
        bp = std::exp(1.0 - double(ref.size()) / double(cand.size()));
    }
    return precision * bp;
}

// Plain recursive LCS; inputs are tiny.
inline std::size_t lcs(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j,
                       std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t best;
    if (a[i] == b[j]) {
        best = 1 + lcs(a, i + 1, b, j + 1, memo);
    } else {
        best = std::max(lcs(a, i + 1, b, j, memo), lcs(a, i, b, j + 1, memo));
    }
    memo[key] = best;
    return best;
}

inline double rouge_l(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    double l = double(lcs(cand, 0, ref, 0, memo));
    if (l == 0.0) return 0.0;
    double p = l / double(cand.size());
    double r = l / double(ref.size());
    return (2.0 * p * r) / (p + r);
}

// Straight-from-the-formula CIDEr: TF-IDF n-gram vectors as maps, cosine per
// n in 1..4, 10x, averaged, then averaged over pairs.
struct CiderPair {
    Tokens cand;
    Tokens ref;
};

inline std::map<Tokens, double> tf(const Tokens& tokens, std::size_t n) {
    std::map<Tokens, double> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        counts[Tokens(tokens.begin() + long(i), tokens.begin() + long(i + n))] += 1.0;
    }
    return counts;
}

inline double cider(const std::vector<CiderPair>& pairs) {
    double total = 0.0;
    for (const auto& pair : pairs) {
        double pair_score = 0.0;
        for (std::size_t n = 1; n <= 4; ++n) {
            auto cand_tf = tf(pair.cand, n);
            auto ref_tf = tf(pair.ref, n);

            auto idf = [&](const Tokens& gram) {
                std::size_t df = 0;
                for (const auto& other : pairs) {
                    auto grams = tf(other.ref, n);
                    if (grams.count(gram)) ++df;
                }
                if (df == 0) df = 1;
                return std::log(double(pairs.size()) / double(df));
            };

            double dot = 0.0, cn = 0.0, rn = 0.0;
            std::set<Tokens> grams;
            for (const auto& [g, c] : cand_tf) grams.insert(g);
            for (const auto& [g, c] : ref_tf) grams.insert(g);
            for (const auto& g : grams) {
                double w_idf = idf(g);
                double wc = (cand_tf.count(g) ? cand_tf[g] : 0.0) * w_idf;
                double wr = (ref_tf.count(g) ? ref_tf[g] : 0.0) * w_idf;
                dot += wc * wr;
                cn += wc * wc;
                rn += wr * wr;
            }
            if (cn > 0.0 && rn > 0.0) pair_score += 10.0 * dot / (std::sqrt(cn) * std::sqrt(rn));
        }
        total += pair_score / 4.0;
    }
    return total / double(pairs.size());
}

// Keyword recall against pre-tokenized keywords: a keyword counts when its
// token sequence appears contiguously in the candidate tokens.
inline double keyword_recall(const Tokens& cand, const std::vector<Tokens>& keywords) {
    if (keywords.empty()) return 1.0;
    std::size_t hit = 0;
    for (const auto& kw : keywords) {
        if (kw.empty()) continue;
        bool found = false;
        for (std::size_t i = 0; !found && i + kw.size() <= cand.size(); ++i) {
            found = std::equal(kw.begin(), kw.end(), cand.begin() + long(i));
        }
        if (found) ++hit;
    }
    return double(hit) / double(keywords.size());
}

struct Confusion {
    double tp = 0, fp = 0, fn = 0, tn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : tp / (tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : tp / (tp + fn); }
    double f1() const {
        double p = precision(), r = recall();
        return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    }
    double accuracy() const {
        double n = tp + fp + fn + tn;
        return n == 0 ? 0.0 : (tp + tn) / n;
    }
};

inline Confusion confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
    Confusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] && actual[i]) c.tp += 1;
        if (predicted[i] && !actual[i]) c.fp += 1;
        if (!predicted[i] && actual[i]) c.fn += 1;
        if (!predicted[i] && !actual[i]) c.tn += 1;
    }
    return c;
}

// Correction accuracy with an exact-string judge: corrupted samples where
// the flag was raised and the proposed string equals the true value.
struct AcCase {
    bool flagged = false;
    bool has_proposal = false;
    std::string proposal;
    bool gold_correct = true;
    std::string truth;
};

inline double correction_accuracy(const std::vector<AcCase>& cases) {
    double corrupted = 0, corrected = 0;
    for (const auto& c : cases) {
        if (c.gold_correct) continue;
        corrupted += 1;
        if (c.flagged && c.has_proposal && c.proposal == c.truth) corrected += 1;
    }
    return corrupted == 0 ? 0.0 : corrected / corrupted;
}

}  // namespace oracle
