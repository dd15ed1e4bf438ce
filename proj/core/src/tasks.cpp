#include "prodkit/tasks.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/hash.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/text.hpp"

#include <algorithm>
#include <unordered_map>

namespace prodkit::tasks {

namespace {

constexpr char kSep = '\x1f';

const TaskTemplate& pick(const std::vector<TaskTemplate>& tpls, SeededRng& rng) {
    return tpls[rng.pick_index(tpls.size())];
}

nlohmann::json base_meta(const ProductRecord& record, const TaskTemplate& instruction,
                         const TaskTemplate& response, const SeededRng& record_rng) {
    return nlohmann::json{
        {"instruction_template", instruction.id},
        {"response_template", response.id},
        {"stream_seed", record_rng.seed()},
        {"category", record.category_path},
    };
}

std::string feature_block(std::span<const AttributePair> attrs) {
    // Table-style feature list: <['Name', 'Value']>, <['Name', 'Value']>
    std::string out;
    for (const auto& a : attrs) {
        if (!out.empty()) out += ", ";
        out += "<['" + escape_bracket_value(a.name) + "', '" + escape_bracket_value(a.value) + "']>";
    }
    return out;
}

std::string ai_unit_key(const AiUnit& unit) {
    std::string key = unit.attr.name;
    if (!unit.unknown) {
        key += kSep;
        key += unit.attr.value;
    }
    key += unit.unknown ? ":u" : ":k";
    return key;
}

}  // namespace

nlohmann::json sample_to_json(const TaskSample& s) {
    nlohmann::json gold = s.gold;
    gold["values"] = s.gold_values;
    return nlohmann::json{
        {"id", s.sample_id},
        {"task", std::string(to_string(s.task))},
        {"image", s.image_ref},
        {"conversations",
         nlohmann::json::array({
             nlohmann::json{{"from", "user"}, {"value", s.user_text}},
             nlohmann::json{{"from", "assistant"}, {"value", s.assistant_text}},
         })},
        {"gold", gold},
        {"meta", s.meta},
    };
}

TaskSample sample_from_json(const nlohmann::json& doc) {
    TaskSample s;
    s.sample_id = doc.at("id").get<std::string>();
    s.task = task_kind_from(doc.at("task").get<std::string>());
    s.image_ref = doc.value("image", "");
    const auto& conv = doc.at("conversations");
    if (!conv.is_array() || conv.size() != 2) {
        throw ConfigError("task sample " + s.sample_id + ": conversations must be [user, assistant]");
    }
    s.user_text = conv[0].at("value").get<std::string>();
    s.assistant_text = conv[1].at("value").get<std::string>();
    s.gold = doc.value("gold", nlohmann::json::object());
    if (auto it = s.gold.find("values"); it != s.gold.end()) {
        s.gold_values = it->get<std::vector<std::string>>();
        s.gold.erase("values");
    }
    s.meta = doc.value("meta", nlohmann::json::object());
    return s;
}

std::vector<TaskSample> load_task_file(const std::string& path) {
    auto in = open_input(path);
    JsonlReader reader(in);
    std::vector<TaskSample> out;
    while (auto line = reader.next()) {
        nlohmann::json doc = nlohmann::json::parse(line->raw, nullptr, false);
        if (doc.is_discarded()) {
            throw IoError("invalid JSON in " + path + " at line " + std::to_string(line->number),
                          line->number - 1);
        }
        out.push_back(sample_from_json(doc));
    }
    return out;
}

void ValuePool::add(std::string_view name, std::string_view value) {
    auto& values = pool_[std::string(name)];
    auto it = std::lower_bound(values.begin(), values.end(), value);
    if (it == values.end() || *it != value) values.insert(it, std::string(value));
}

void ValuePool::add_corpus(std::span<const ProductRecord> records) {
    for (const auto& r : records) {
        for (const auto& a : r.attributes) add(a.name, a.value);
    }
}

std::span<const std::string> ValuePool::values(std::string_view name) const {
    auto it = pool_.find(name);
    if (it == pool_.end()) return {};
    return it->second;
}

TaskSample build_cg(const ProductRecord& record, const TemplateBank& bank,
                    const SeededRng& record_rng) {
    auto rng = record_rng.ns("CG");
    const auto& tpls = bank.for_task(TaskKind::CG);
    const auto& instruction = pick(tpls.instructions, rng);
    const auto& response = pick(tpls.responses, rng);

    SlotMap slots{{"caption", record.caption}};
    Conversation conv = render_conversation(instruction, response, slots);

    TaskSample s;
    s.sample_id = "cg:" + record.id;
    s.task = TaskKind::CG;
    s.image_ref = record.image_ref;
    s.user_text = std::move(conv.user_text);
    s.assistant_text = std::move(conv.assistant_text);
    s.gold_values = std::move(conv.gold_values);
    s.gold = {{"caption", record.caption}};
    s.meta = base_meta(record, instruction, response, record_rng);
    s.meta["slots"] = {{"caption", record.caption}};
    return s;
}

std::optional<TaskSample> build_cc(const ProductRecord& record, const TemplateBank& bank,
                                   const SeededRng& record_rng) {
    std::vector<AttributePair> present;
    for (const auto& a : record.attributes) {
        if (text::contains_phrase(record.caption, a.value)) present.push_back(a);
    }
    if (present.empty()) return std::nullopt;

    std::vector<std::string> keywords;
    keywords.reserve(present.size());
    for (const auto& a : present) keywords.push_back(a.value);
    std::string base_caption = text::remove_phrases(record.caption, keywords);

    auto rng = record_rng.ns("CC");
    const auto& tpls = bank.for_task(TaskKind::CC);
    const auto& instruction = pick(tpls.instructions, rng);
    const auto& response = pick(tpls.responses, rng);

    std::string features = feature_block(present);
    SlotMap slots{{"features", features},
                  {"base_caption", base_caption},
                  {"caption", record.caption}};
    Conversation conv = render_conversation(instruction, response, slots);

    TaskSample s;
    s.sample_id = "cc:" + record.id;
    s.task = TaskKind::CC;
    s.image_ref = record.image_ref;
    s.user_text = std::move(conv.user_text);
    s.assistant_text = std::move(conv.assistant_text);
    s.gold_values = std::move(conv.gold_values);
    nlohmann::json removed = nlohmann::json::array();
    for (const auto& a : present) removed.push_back({{"name", a.name}, {"value", a.value}});
    s.gold = {{"caption", record.caption}, {"base_caption", base_caption}, {"keywords", keywords},
              {"removed", removed}};
    s.meta = base_meta(record, instruction, response, record_rng);
    s.meta["slots"] = {{"features", features}, {"base_caption", base_caption}};
    return s;
}

std::vector<TaskSample> build_ai_units(const ProductRecord& record, std::span<const AiUnit> units,
                                       const TemplateBank& bank, const SeededRng& record_rng) {
    std::vector<TaskSample> out;
    out.reserve(units.size());
    const auto& tpls = bank.for_task(TaskKind::AI);
    auto ai_rng = record_rng.ns("AI");

    std::unordered_map<std::string, int> occurrences;
    for (const auto& unit : units) {
        std::string key = ai_unit_key(unit);
        int occurrence = ++occurrences[key];
        if (occurrence > 1) key += kSep + std::to_string(occurrence);

        auto rng = ai_rng.ns(key);
        const auto& instruction = pick(tpls.instructions, rng);
        const auto& response = pick(tpls.responses, rng);

        std::string value = unit.unknown ? "Unknown" : unit.attr.value;
        SlotMap slots{{"attr_name", unit.attr.name}, {"value", value}};
        Conversation conv = render_conversation(instruction, response, slots);

        TaskSample s;
        s.sample_id = "ai:" + record.id + ":" + fnv1a64_hex(key).substr(0, 12) +
                      (unit.unknown ? ":u" : ":k");
        s.task = TaskKind::AI;
        s.image_ref = record.image_ref;
        s.user_text = std::move(conv.user_text);
        s.assistant_text = std::move(conv.assistant_text);
        s.gold_values = std::move(conv.gold_values);
        s.gold = {{"attr_name", unit.attr.name}, {"value", value}, {"is_unknown", unit.unknown}};
        s.meta = base_meta(record, instruction, response, record_rng);
        s.meta["slots"] = {{"caption", record.caption}, {"attr_name", unit.attr.name}};
        if (unit.unknown) s.meta["unknown_designation"] = true;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TaskSample> build_ai(const ProductRecord& record, const TemplateBank& bank,
                                 const SeededRng& record_rng) {
    std::vector<AiUnit> units;
    units.reserve(record.attributes.size() + record.filtered_attribute_names.size());
    for (const auto& a : record.attributes) units.push_back({a, false});
    for (const auto& name : record.filtered_attribute_names) {
        units.push_back({AttributePair{name, ""}, true});
    }
    return build_ai_units(record, units, bank, record_rng);
}

std::optional<TaskSample> build_ac(const ProductRecord& record, const ValuePool& pool,
                                   const TemplateBank& bank, const SeededRng& record_rng,
                                   double p_corrupt) {
    if (record.attributes.empty()) return std::nullopt;

    auto rng = record_rng.ns("AC");
    const auto& attr = record.attributes[rng.pick_index(record.attributes.size())];

    bool corrupt = rng.bernoulli(p_corrupt);
    std::string shown = attr.value;
    if (corrupt) {
        auto candidates = pool.values(attr.name);
        std::vector<std::string_view> others;
        for (const auto& v : candidates) {
            if (v != attr.value) others.push_back(v);
        }
        if (others.empty()) {
            corrupt = false;  // pool holds only the original; forced correct sample
        } else {
            shown = std::string(others[rng.pick_index(others.size())]);
        }
    }

    const auto& tpls = bank.for_task(TaskKind::AC);
    const auto& instruction = pick(tpls.instructions, rng);
    const auto& response = corrupt ? pick(tpls.responses_incorrect, rng) : pick(tpls.responses, rng);

    SlotMap slots{{"attr_name", attr.name},
                  {"shown_value", shown},
                  {"correct_value", attr.value}};
    Conversation conv = render_conversation(instruction, response, slots);

    TaskSample s;
    s.sample_id = "ac:" + record.id;
    s.task = TaskKind::AC;
    s.image_ref = record.image_ref;
    s.user_text = std::move(conv.user_text);
    s.assistant_text = std::move(conv.assistant_text);
    s.gold_values = std::move(conv.gold_values);
    s.gold = {{"attr_name", attr.name},
              {"shown_value", shown},
              {"is_correct", !corrupt},
              {"correct_value", attr.value}};
    s.meta = base_meta(record, instruction, response, record_rng);
    s.meta["slots"] = {{"caption", record.caption},
                       {"attr_name", attr.name},
                       {"shown_value", shown}};
    return s;
}

std::optional<TaskSample> build_cmc(const ProductRecord& record, const CategoryTaxonomy& taxonomy,
                                    const TemplateBank& bank, const SeededRng& record_rng) {
    auto siblings = taxonomy.siblings(record.category_path);
    if (!siblings) return std::nullopt;

    const std::string& truth = record.category_path.back();
    auto rng = record_rng.ns("CMC");

    std::vector<std::string> options{truth};
    const std::size_t take = std::min<std::size_t>(9, siblings->size());
    for (auto idx : rng.sample_without_replacement(siblings->size(), take)) {
        options.push_back((*siblings)[idx]);
    }
    rng.shuffle(options);

    std::size_t truth_pos = 0;
    std::string options_block;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i] == truth) truth_pos = i;
        if (i > 0) options_block += ",";
        options_block += std::to_string(i + 1) + ": <" + escape_bracket_value(options[i]) + ">";
    }

    const auto& tpls = bank.for_task(TaskKind::CMC);
    const auto& instruction = pick(tpls.instructions, rng);
    const auto& response = pick(tpls.responses, rng);

    std::string choice = std::to_string(truth_pos + 1) + ": " + truth;
    SlotMap slots{{"options", options_block}, {"choice", choice}};
    Conversation conv = render_conversation(instruction, response, slots);

    TaskSample s;
    s.sample_id = "cmc:" + record.id;
    s.task = TaskKind::CMC;
    s.image_ref = record.image_ref;
    s.user_text = std::move(conv.user_text);
    s.assistant_text = std::move(conv.assistant_text);
    s.gold_values = std::move(conv.gold_values);
    s.gold = {{"option_index", truth_pos + 1}, {"option_label", truth}, {"options", options}};
    s.meta = base_meta(record, instruction, response, record_rng);
    s.meta["slots"] = {{"caption", record.caption}, {"options", options_block}};
    return s;
}

TaskSetBuild build_tasks(std::span<const ProductRecord> records, const CategoryTaxonomy* taxonomy,
                         const TemplateBank& bank, const BuildConfig& config) {
    ValuePool pool;
    pool.add_corpus(records);

    TaskSetBuild build;
    for (TaskKind k : {TaskKind::CG, TaskKind::CC, TaskKind::AI, TaskKind::AC, TaskKind::CMC}) {
        build.by_task[k];  // ensure all five sets exist even when empty
    }

    SeededRng root(config.seed);
    for (const auto& record : records) {
        auto record_rng = root.ns(record.id);

        build.by_task[TaskKind::CG].push_back(build_cg(record, bank, record_rng));

        if (auto cc = build_cc(record, bank, record_rng)) {
            build.by_task[TaskKind::CC].push_back(std::move(*cc));
        } else {
            ++build.cc_skipped;
        }

        auto ai = build_ai(record, bank, record_rng);
        auto& ai_out = build.by_task[TaskKind::AI];
        ai_out.insert(ai_out.end(), std::make_move_iterator(ai.begin()),
                      std::make_move_iterator(ai.end()));

        if (auto ac = build_ac(record, pool, bank, record_rng, config.p_corrupt)) {
            build.by_task[TaskKind::AC].push_back(std::move(*ac));
        }

        if (taxonomy != nullptr) {
            if (auto cmc = build_cmc(record, *taxonomy, bank, record_rng)) {
                build.by_task[TaskKind::CMC].push_back(std::move(*cmc));
            } else {
                ++build.cmc_skipped;
                build.cmc_skipped_ids.push_back(record.id);
            }
        }
    }
    return build;
}

nlohmann::json build_counts_json(const TaskSetBuild& build) {
    nlohmann::json counts;
    for (const auto& [kind, samples] : build.by_task) {
        counts[std::string(to_string(kind))] = samples.size();
    }
    return nlohmann::json{
        {"samples", counts},
        {"cc_skipped", build.cc_skipped},
        {"cmc_skipped", build.cmc_skipped},
    };
}

}  // namespace prodkit::tasks
