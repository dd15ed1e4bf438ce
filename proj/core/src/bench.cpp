#include "prodkit/bench.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/hash.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/rng.hpp"
#include "prodkit/text.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace prodkit::bench {

using experts::AnswerStatus;

nlohmann::json output_to_json(const SampleOutput& o) {
    return nlohmann::json{
        {"id", o.id},
        {"raw_text", o.raw_text},
        {"status", std::string(to_string(o.status))},
        {"latency_ms", o.latency_ms},
    };
}

SampleOutput output_from_json(const nlohmann::json& doc) {
    SampleOutput o;
    o.id = doc.at("id").get<std::string>();
    o.raw_text = doc.value("raw_text", "");
    o.status = experts::answer_status_from(doc.at("status").get<std::string>());
    o.latency_ms = doc.value("latency_ms", 0LL);
    return o;
}

RunDir::RunDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    auto lock_path = dir_ / "lock";
    lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (lock_fd_ < 0) {
        throw ConfigError("run directory is locked by another writer: " + dir_.string() +
                          " (remove " + lock_path.string() + " if stale)");
    }
}

RunDir::~RunDir() {
    if (lock_fd_ >= 0) {
        ::close(lock_fd_);
        std::error_code ec;
        std::filesystem::remove(dir_ / "lock", ec);
    }
}

void RunDir::write_config_once(const nlohmann::json& config) {
    auto path = dir_ / "config.json";
    if (std::filesystem::exists(path)) return;
    write_json_file(path.string(), config);
}

std::map<std::string, SampleOutput> RunDir::read_outputs(const std::filesystem::path& dir) {
    std::map<std::string, SampleOutput> out;
    auto path = dir / "outputs.jsonl";
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    JsonlReader reader(in);
    while (auto line = reader.next()) {
        nlohmann::json doc = nlohmann::json::parse(line->raw, nullptr, false);
        if (doc.is_discarded()) {
            throw IoError("corrupt output line in " + path.string() + " at line " +
                          std::to_string(line->number), line->number - 1);
        }
        SampleOutput o = output_from_json(doc);
        out[o.id] = std::move(o);
    }
    return out;
}

std::map<std::string, SampleOutput> RunDir::load_outputs() const { return read_outputs(dir_); }

void RunDir::append_output(const SampleOutput& o) {
    auto path = dir_ / "outputs.jsonl";
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append to " + path.string());
    out << output_to_json(o).dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failure: " + path.string());
}

void RunDir::write_stats(const nlohmann::json& stats) {
    write_json_file((dir_ / "run_stats.json").string(), stats);
}

nlohmann::json stats_to_json(const BenchRunStats& s) {
    return nlohmann::json{
        {"total", s.total},     {"reused", s.reused},   {"requested", s.requested},
        {"ok", s.ok},           {"refused", s.refused}, {"failed", s.failed},
        {"wall_ms", s.wall_ms},
    };
}

namespace {

SlotMap slots_from_meta(const tasks::TaskSample& sample) {
    SlotMap slots;
    if (sample.meta.contains("slots")) {
        for (const auto& [k, v] : sample.meta["slots"].items()) {
            if (v.is_string()) slots[k] = v.get<std::string>();
        }
    }
    return slots;
}

}  // namespace

BenchRunStats run_benchmark(const experts::ExpertSpec& candidate, const TaskSets& task_sets,
                            experts::ExpertGateway& gateway, const BenchConfig& config,
                            RunDir& dir) {
    auto started = std::chrono::steady_clock::now();
    const bool scripted = std::holds_alternative<experts::ScriptedTransportSpec>(candidate.transport);

    auto existing = dir.load_outputs();

    struct WorkItem {
        const tasks::TaskSample* sample;
        std::string prompt;
    };
    std::vector<WorkItem> pending;
    BenchRunStats stats;
    for (const auto& [kind, samples] : task_sets) {
        for (const auto& sample : samples) {
            ++stats.total;
            if (existing.count(sample.sample_id)) {
                ++stats.reused;
                continue;
            }
            std::string prompt = render_prompt(prompts::eval_prompt(kind), slots_from_meta(sample));
            pending.push_back({&sample, std::move(prompt)});
        }
    }

    const std::size_t width = std::max(1, config.workers);
    std::vector<SampleOutput> results(pending.size());

    // Batches commit in sample order so interrupted runs resume into
    // byte-identical output files.
    for (std::size_t batch = 0; batch < pending.size(); batch += width) {
        const std::size_t end = std::min(pending.size(), batch + width);
        std::atomic<std::size_t> next{batch};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
                const auto& item = pending[i];
                auto answer = gateway.ask_raw(candidate, item.sample->image_ref, item.prompt);
                SampleOutput o;
                o.id = item.sample->sample_id;
                o.raw_text = answer.answer_text;
                o.status = answer.status;
                o.latency_ms = scripted ? 0 : answer.latency.count();
                results[i] = std::move(o);
            }
        };
        if (end - batch == 1) {
            worker();
        } else {
            std::vector<std::thread> threads;
            for (std::size_t w = 0; w < std::min(width, end - batch); ++w) threads.emplace_back(worker);
            for (auto& t : threads) t.join();
        }
        for (std::size_t i = batch; i < end; ++i) {
            dir.append_output(results[i]);
            ++stats.requested;
            switch (results[i].status) {
                case AnswerStatus::Ok: ++stats.ok; break;
                case AnswerStatus::Refused: ++stats.refused; break;
                default: ++stats.failed; break;
            }
        }
    }

    stats.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started).count();
    dir.write_stats(stats_to_json(stats));
    return stats;
}

namespace {

metrics::AcPrediction parse_ac_reply(const std::string& reply) {
    metrics::AcPrediction pred;
    std::size_t b = 0;
    while (b < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[b]))) ++b;
    std::size_t e = b;
    while (e < reply.size() && std::isalpha(static_cast<unsigned char>(reply[e]))) ++e;
    std::string token = text::fold(reply.substr(b, e - b));

    if (token == "no") {
        pred.flag_incorrect = true;
        auto values = extract_bracketed(reply);
        if (!values.empty()) {
            // The correction is the last bracketed value; earlier ones name
            // the attribute.
            pred.proposed_value = values.back();
        } else {
            std::string rest = text::trim(reply.substr(e));
            while (!rest.empty() && (rest.front() == ',' || rest.front() == '.' || rest.front() == ':' ||
                                     rest.front() == ';')) {
                rest = text::trim(rest.substr(1));
            }
            if (!rest.empty()) pred.proposed_value = rest;
        }
    }
    return pred;
}

std::vector<std::string> category_of(const tasks::TaskSample& s) {
    if (s.meta.contains("category") && s.meta["category"].is_array()) {
        return s.meta["category"].get<std::vector<std::string>>();
    }
    return {};
}

}  // namespace

ScoredRun score_run(const std::map<std::string, SampleOutput>& outputs, const TaskSets& gold,
                    const metrics::JudgeFn& judge, const metrics::RefusalDetector& detector) {
    // Outputs referencing unknown sample ids mean the run and the gold sets
    // are misaligned.
    {
        std::unordered_set<std::string> gold_ids;
        for (const auto& [kind, samples] : gold) {
            for (const auto& s : samples) gold_ids.insert(s.sample_id);
        }
        for (const auto& [id, o] : outputs) {
            if (!gold_ids.count(id)) {
                throw ConfigError("output id not present in gold task sets: " + id);
            }
        }
    }

    ScoredRun scored;
    const auto& tok = metrics::Tokenizer::standard();

    for (const auto& [kind, samples] : gold) {
        if (samples.empty()) continue;

        metrics::MetricReport report;
        report.task = std::string(to_string(kind));
        report.samples = samples.size();
        report.meta["tokenizer"] = tok.rule_id;

        std::uint64_t missing = 0, refused = 0, failed = 0;
        auto output_for = [&](const tasks::TaskSample& s) -> const SampleOutput* {
            auto it = outputs.find(s.sample_id);
            if (it == outputs.end()) {
                ++missing;
                return nullptr;
            }
            if (it->second.status == AnswerStatus::Refused) ++refused;
            else if (it->second.status != AnswerStatus::Ok) ++failed;
            return &it->second;
        };

        switch (kind) {
            case TaskKind::CG:
            case TaskKind::CC: {
                std::vector<std::pair<std::string, std::string>> pairs;
                double recall_total = 0.0;
                std::size_t scored_count = 0;
                for (const auto& s : samples) {
                    const auto* o = output_for(s);
                    if (!o) continue;
                    ++scored_count;
                    std::string candidate =
                        o->status == AnswerStatus::Ok ? metrics::extract_answer(o->raw_text) : "";
                    std::string reference = s.gold.value("caption", "");
                    if (kind == TaskKind::CC) {
                        std::vector<std::string> keywords =
                            s.gold.value("keywords", std::vector<std::string>{});
                        recall_total += metrics::keyword_recall(candidate, keywords);
                    }
                    pairs.emplace_back(std::move(candidate), std::move(reference));
                }
                if (!pairs.empty()) {
                    double bleu_total = 0.0, rouge_total = 0.0;
                    for (const auto& [cand, ref] : pairs) {
                        bleu_total += metrics::bleu1(cand, ref, tok);
                        rouge_total += metrics::rouge_l(cand, ref, tok);
                    }
                    auto cider = metrics::cider(pairs, tok);
                    report.values["Bleu1"] = bleu_total / static_cast<double>(pairs.size());
                    report.values["ROUGE_L"] = rouge_total / static_cast<double>(pairs.size());
                    report.values["CIDEr"] = cider.score;
                    if (cider.degenerate_idf) report.meta["cider_degenerate_idf"] = true;
                    report.meta["cider_variant"] = "corpus-idf single-ref no-length-penalty";
                    if (kind == TaskKind::CC) {
                        report.values["Rec"] = recall_total / static_cast<double>(scored_count);
                    }
                }
                break;
            }
            case TaskKind::AI: {
                std::vector<std::string> predictions;
                std::vector<metrics::AiGold> golds;
                std::vector<const tasks::TaskSample*> kept;
                for (const auto& s : samples) {
                    const auto* o = output_for(s);
                    if (!o) continue;
                    // Refusals and transport failures read as the canonical
                    // refusal; they may still be right on Unknown golds.
                    predictions.push_back(o->status == AnswerStatus::Ok ? o->raw_text : "Unknown");
                    metrics::AiGold g;
                    g.attr_name = s.gold.value("attr_name", "");
                    g.value = s.gold.value("value", "");
                    g.is_unknown = s.gold.value("is_unknown", false);
                    golds.push_back(std::move(g));
                    kept.push_back(&s);
                }
                if (!golds.empty()) {
                    auto acc = metrics::judged_accuracy(predictions, golds, judge, detector);
                    report.values["Acc"] = acc.accuracy;
                    report.meta["judge"] = {{"scored", acc.scored}, {"unscored", acc.unscored}};

                    std::vector<bool> refused_pred, is_unknown;
                    for (std::size_t i = 0; i < predictions.size(); ++i) {
                        refused_pred.push_back(detector.is_refusal(predictions[i]));
                        is_unknown.push_back(golds[i].is_unknown);
                    }
                    auto rej = metrics::rejection_metrics(refused_pred, is_unknown);
                    report.values["Rej_F1"] = rej.f1;
                    report.values["Rej_Prec"] = rej.precision;
                    report.values["Rej_Rec"] = rej.recall;
                    report.values["Rej_Acc"] = rej.accuracy;

                    for (std::size_t i = 0; i < kept.size(); ++i) {
                        AiSampleResult r;
                        r.id = kept[i]->sample_id;
                        r.scored = acc.per_sample_scored[i];
                        r.correct = acc.per_sample_correct[i];
                        r.category = category_of(*kept[i]);
                        scored.ai_samples.push_back(std::move(r));
                    }
                }
                break;
            }
            case TaskKind::AC: {
                std::vector<metrics::AcPrediction> predictions;
                std::vector<metrics::AcGold> golds;
                for (const auto& s : samples) {
                    const auto* o = output_for(s);
                    if (!o) continue;
                    metrics::AcGold g;
                    g.is_correct = s.gold.value("is_correct", true);
                    g.attr_name = s.gold.value("attr_name", "");
                    g.correct_value = s.gold.value("correct_value", "");
                    if (o->status == AnswerStatus::Ok) {
                        predictions.push_back(parse_ac_reply(o->raw_text));
                    } else {
                        // Scored as a misclassification either way.
                        metrics::AcPrediction p;
                        p.flag_incorrect = g.is_correct;
                        predictions.push_back(std::move(p));
                    }
                    golds.push_back(std::move(g));
                }
                if (!golds.empty()) {
                    auto ac = metrics::ac_metrics(predictions, golds, judge);
                    report.values["F1"] = ac.f1;
                    report.values["Prec"] = ac.precision;
                    report.values["Rec"] = ac.recall;
                    report.values["CAcc"] = ac.correction_accuracy;
                    report.meta["corrupted"] = ac.corrupted;
                    if (ac.unscored > 0) report.meta["judge_unscored"] = ac.unscored;
                }
                break;
            }
            case TaskKind::CMC: {
                std::vector<std::string> predictions;
                std::vector<metrics::CmcGold> golds;
                for (const auto& s : samples) {
                    const auto* o = output_for(s);
                    if (!o) continue;
                    predictions.push_back(o->status == AnswerStatus::Ok ? o->raw_text : "");
                    metrics::CmcGold g;
                    g.option_index = s.gold.value("option_index", 1ULL);
                    g.label = s.gold.value("option_label", "");
                    golds.push_back(std::move(g));
                }
                if (!golds.empty()) {
                    report.values["Acc"] = metrics::cmc_accuracy(predictions, golds);
                }
                break;
            }
        }

        report.meta["outputs"] = {{"missing", missing}, {"refused", refused}, {"failed", failed}};
        if (missing > 0) {
            scored.partial = true;
            scored.missing += missing;
            report.meta["partial"] = true;
        }
        scored.reports.push_back(std::move(report));
    }
    return scored;
}

DomainMap DomainMap::from_json(const nlohmann::json& doc) {
    DomainMap map;
    if (!doc.is_object() || !doc.contains("domains") || !doc["domains"].is_array()) {
        throw ConfigError("domain map: expected an object with a domains array");
    }
    for (const auto& entry : doc["domains"]) {
        if (!entry.contains("prefix") || !entry.contains("label")) {
            throw ConfigError("domain map entries need prefix and label");
        }
        map.add(entry["prefix"].get<std::vector<std::string>>(), entry["label"].get<std::string>());
    }
    return map;
}

DomainMap DomainMap::load_file(const std::string& path) {
    return from_json(load_json_file(path));
}

void DomainMap::add(std::vector<std::string> prefix, std::string label) {
    entries_.push_back({std::move(prefix), std::move(label)});
}

std::string DomainMap::label_for(std::span<const std::string> path) const {
    const Entry* best = nullptr;
    for (const auto& e : entries_) {
        if (e.prefix.size() > path.size()) continue;
        if (!std::equal(e.prefix.begin(), e.prefix.end(), path.begin())) continue;
        if (best == nullptr || e.prefix.size() > best->prefix.size()) best = &e;
    }
    return best ? best->label : "Other";
}

std::vector<DomainRow> domain_split(std::span<const AiSampleResult> ai_samples,
                                    const DomainMap& map) {
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> buckets;  // label -> {n, correct}
    for (const auto& s : ai_samples) {
        if (!s.scored) continue;
        auto& bucket = buckets[map.label_for(s.category)];
        ++bucket.first;
        if (s.correct) ++bucket.second;
    }
    std::vector<DomainRow> rows;
    rows.reserve(buckets.size());
    for (const auto& [label, counts] : buckets) {
        DomainRow row;
        row.domain = label;
        row.samples = counts.first;
        row.accuracy = counts.first == 0
                           ? 0.0
                           : static_cast<double>(counts.second) / static_cast<double>(counts.first);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json domain_rows_to_json(std::span<const DomainRow> rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"domain", r.domain}, {"samples", r.samples}, {"accuracy", r.accuracy}});
    }
    return arr;
}

AblationVariants build_ablation_variants(std::span<const ProductRecord> raw_records,
                                         std::span<const ProductRecord> clean_records,
                                         const TemplateBank& bank, const AblationConfig& config) {
    std::map<std::string, const ProductRecord*> clean_by_id;
    for (const auto& r : clean_records) clean_by_id[r.id] = &r;

    AblationVariants variants;
    SeededRng root(config.seed);

    for (const auto& raw : raw_records) {
        auto record_rng = root.ns(raw.id);

        // Variant A: up to `cap` attributes randomly sampled from the
        // original list, original order preserved.
        {
            std::vector<tasks::AiUnit> units;
            if (raw.attributes.size() > config.attribute_cap) {
                auto pick_rng = record_rng.ns("hallu-cap");
                auto chosen = pick_rng.sample_without_replacement(raw.attributes.size(),
                                                                  config.attribute_cap);
                std::sort(chosen.begin(), chosen.end());
                for (auto idx : chosen) units.push_back({raw.attributes[idx], false});
            } else {
                for (const auto& a : raw.attributes) units.push_back({a, false});
            }
            auto built = tasks::build_ai_units(raw, units, bank, record_rng);
            variants.with_hallucination.insert(variants.with_hallucination.end(),
                                               std::make_move_iterator(built.begin()),
                                               std::make_move_iterator(built.end()));
        }

        // Variant B: the filter's survivors (kept values plus Unknown
        // designations) in original attribute order, strictly capped.
        auto it = clean_by_id.find(raw.id);
        if (it == clean_by_id.end()) continue;  // dropped by the filter
        const ProductRecord& clean = *it->second;

        std::multiset<std::pair<std::string, std::string>> kept;
        for (const auto& a : clean.attributes) kept.insert({a.name, a.value});
        std::multiset<std::string> unknown_names(clean.filtered_attribute_names.begin(),
                                                 clean.filtered_attribute_names.end());

        std::vector<tasks::AiUnit> units;
        for (const auto& a : raw.attributes) {
            if (units.size() >= config.attribute_cap) break;
            auto kept_it = kept.find({a.name, a.value});
            if (kept_it != kept.end()) {
                kept.erase(kept_it);
                units.push_back({a, false});
                continue;
            }
            auto unk_it = unknown_names.find(a.name);
            if (unk_it != unknown_names.end()) {
                unknown_names.erase(unk_it);
                units.push_back({AttributePair{a.name, ""}, true});
            }
            // otherwise indeterminate or capped out of the clean corpus
        }
        auto built = tasks::build_ai_units(raw, units, bank, record_rng);
        variants.without_hallucination.insert(variants.without_hallucination.end(),
                                              std::make_move_iterator(built.begin()),
                                              std::make_move_iterator(built.end()));
    }
    return variants;
}

ReportLayout ReportLayout::standard() {
    ReportLayout layout;
    layout.rows = {
        {TaskKind::CG, "Bleu1", false},  {TaskKind::CG, "ROUGE_L", false},
        {TaskKind::CG, "CIDEr", false},  {TaskKind::CC, "Bleu1", false},
        {TaskKind::CC, "ROUGE_L", false}, {TaskKind::CC, "CIDEr", false},
        {TaskKind::CC, "Rec", true},     {TaskKind::AI, "Acc", true},
        {TaskKind::AC, "F1", true},      {TaskKind::AC, "Prec", true},
        {TaskKind::AC, "Rec", true},     {TaskKind::AC, "CAcc", true},
        {TaskKind::CMC, "Acc", true},
    };
    return layout;
}

namespace {

std::string format_value(double v, bool percent) {
    char buf[32];
    if (percent) {
        std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
    } else {
        std::snprintf(buf, sizeof buf, "%.3f", v);
    }
    return buf;
}

const metrics::MetricReport* report_for(const std::vector<metrics::MetricReport>& reports,
                                        TaskKind task) {
    for (const auto& r : reports) {
        if (r.task == to_string(task)) return &r;
    }
    return nullptr;
}

std::string cell_for(const NamedReports& column, const ReportLayout::Row& row) {
    const auto* report = report_for(column.reports, row.task);
    if (!report) return "-";
    auto it = report->values.find(row.metric);
    if (it == report->values.end()) return "-";
    return format_value(it->second, row.percent);
}

}  // namespace

std::string render_table(std::span<const NamedReports> columns, const ReportLayout& layout) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Task", "Metric"};
    for (const auto& c : columns) header.push_back(c.label);
    grid.push_back(header);

    for (const auto& row : layout.rows) {
        std::vector<std::string> line{std::string(to_string(row.task)),
                                      row.metric + (row.percent ? "(%)" : "")};
        for (const auto& c : columns) line.push_back(cell_for(c, row));
        grid.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& line : grid) {
        for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
    }
    std::ostringstream out;
    for (std::size_t li = 0; li < grid.size(); ++li) {
        for (std::size_t i = 0; i < grid[li].size(); ++i) {
            out << grid[li][i];
            if (i + 1 < grid[li].size()) {
                out << std::string(widths[i] - grid[li][i].size() + 2, ' ');
            }
        }
        out << '\n';
        if (li == 0) {
            std::size_t total = 0;
            for (std::size_t w : widths) total += w + 2;
            out << std::string(total > 2 ? total - 2 : total, '-') << '\n';
        }
    }
    return out.str();
}

std::string render_csv(std::span<const NamedReports> columns, const ReportLayout& layout) {
    std::ostringstream out;
    out << "task,metric";
    for (const auto& c : columns) out << ',' << c.label;
    out << '\n';
    for (const auto& row : layout.rows) {
        out << to_string(row.task) << ',' << row.metric << (row.percent ? "(%)" : "");
        for (const auto& c : columns) out << ',' << cell_for(c, row);
        out << '\n';
    }
    return out.str();
}

std::vector<metrics::MetricReport> mean_reports(
    std::span<const std::vector<metrics::MetricReport>> runs) {
    if (runs.empty()) return {};

    std::vector<metrics::MetricReport> mean;
    for (const auto& report : runs[0]) {
        metrics::MetricReport m;
        m.task = report.task;
        m.samples = report.samples;
        m.meta = {{"mean_of_runs", runs.size()}};
        for (const auto& [name, value] : report.values) {
            double total = value;
            std::size_t found = 1;
            for (std::size_t r = 1; r < runs.size(); ++r) {
                for (const auto& other : runs[r]) {
                    if (other.task == report.task) {
                        auto it = other.values.find(name);
                        if (it != other.values.end()) {
                            total += it->second;
                            ++found;
                        }
                        break;
                    }
                }
            }
            m.values[name] = total / static_cast<double>(found);
        }
        mean.push_back(std::move(m));
    }
    return mean;
}

}  // namespace prodkit::bench
