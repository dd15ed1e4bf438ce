#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodkit/corpus.hpp"
#include "prodkit/rng.hpp"
#include "prodkit/taxonomy.hpp"
#include "prodkit/templates.hpp"

namespace prodkit::tasks {

/// One benchmark/training item. `gold_values` is the ordered list of values
/// wrapped in <> inside the assistant turn; extract_bracketed(assistant_text)
/// recovers exactly this list. `gold` carries the task-specific structure
/// used by the scorers, and `meta` records template ids plus the slots the
/// evaluation prompts need.
struct TaskSample {
    std::string sample_id;
    TaskKind task = TaskKind::CG;
    std::string image_ref;
    std::string user_text;
    std::string assistant_text;
    std::vector<std::string> gold_values;
    nlohmann::json gold;
    nlohmann::json meta;
};

nlohmann::json sample_to_json(const TaskSample& s);
TaskSample sample_from_json(const nlohmann::json& doc);

std::vector<TaskSample> load_task_file(const std::string& path);

/// Distinct observed values per attribute name across a corpus. Built once,
/// read-only afterwards; values are kept sorted for deterministic draws.
class ValuePool {
public:
    void add(std::string_view name, std::string_view value);
    void add_corpus(std::span<const ProductRecord> records);

    /// Sorted unique values for `name`; empty when unseen.
    std::span<const std::string> values(std::string_view name) const;

private:
    std::map<std::string, std::vector<std::string>, std::less<>> pool_;
};

struct BuildConfig {
    std::uint64_t seed = 0;
    double p_corrupt = 0.5;  // AC corrupted-sample probability
};

/// Caption generation: the user asks for a caption, the gold reply wraps the
/// original one.
TaskSample build_cg(const ProductRecord& record, const TemplateBank& bank, const SeededRng& record_rng);

/// Caption completion: attribute values found in the caption (case-
/// insensitive word-boundary phrases) are removed to form the base caption;
/// the user turn provides the base plus the removed pairs; gold is the full
/// caption. Skips (nullopt) when no attribute value occurs in the caption.
std::optional<TaskSample> build_cc(const ProductRecord& record, const TemplateBank& bank,
                                   const SeededRng& record_rng);

struct AiUnit {
    AttributePair attr;   // value ignored when unknown
    bool unknown = false;
};

/// Attribute inference over an explicit unit list. Sample ids and template
/// draws are keyed by attribute content, not position, so subsets built from
/// the same seed agree on their common samples.
std::vector<TaskSample> build_ai_units(const ProductRecord& record, std::span<const AiUnit> units,
                                       const TemplateBank& bank, const SeededRng& record_rng);

/// One sample per kept attribute (gold = value) plus one per filtered name
/// (gold = "Unknown").
std::vector<TaskSample> build_ai(const ProductRecord& record, const TemplateBank& bank,
                                 const SeededRng& record_rng);

/// Attribute correction: with probability p_corrupt the shown value is a
/// pool value different from the original (gold: incorrect + correction);
/// otherwise the original is shown (gold: correct). Falls back to a correct
/// sample when the pool holds nothing but the original.
std::optional<TaskSample> build_ac(const ProductRecord& record, const ValuePool& pool,
                                   const TemplateBank& bank, const SeededRng& record_rng,
                                   double p_corrupt);

/// Category multiple choice: the true leaf plus at most nine sampled
/// siblings, shuffled and numbered from 1. Skips when the record's category
/// path is missing from the taxonomy.
std::optional<TaskSample> build_cmc(const ProductRecord& record, const CategoryTaxonomy& taxonomy,
                                    const TemplateBank& bank, const SeededRng& record_rng);

struct TaskSetBuild {
    std::map<TaskKind, std::vector<TaskSample>> by_task;
    std::uint64_t cc_skipped = 0;
    std::uint64_t cmc_skipped = 0;   // category path not in taxonomy
    std::vector<std::string> cmc_skipped_ids;
};

/// Builds all five task sets over a clean corpus. Pass a null taxonomy to
/// skip CMC. Fully determined by (records, seed, bank): all randomness flows
/// from one root generator namespaced per record id.
TaskSetBuild build_tasks(std::span<const ProductRecord> records, const CategoryTaxonomy* taxonomy,
                         const TemplateBank& bank, const BuildConfig& config);

nlohmann::json build_counts_json(const TaskSetBuild& build);

}  // namespace prodkit::tasks
