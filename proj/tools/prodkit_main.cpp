// prodkit: curate product-understanding corpora, filter hallucinated
// attributes by multi-expert consensus, build the five task datasets, and
// benchmark candidate models.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "prodkit/bench.hpp"
#include "prodkit/consensus.hpp"
#include "prodkit/corpus.hpp"
#include "prodkit/errors.hpp"
#include "prodkit/experts.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/metrics.hpp"
#include "prodkit/taxonomy.hpp"
#include "prodkit/tasks.hpp"
#include "prodkit/templates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitUpstream = 3;

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string run_dir;
};

std::uint64_t require_seed(const GlobalOpts& g) {
    if (!g.seed) {
        throw CLI::ValidationError("--seed", "a seed is required for dataset-producing commands");
    }
    return *g.seed;
}

prodkit::TemplateBank load_bank(const std::string& templates_path) {
    if (templates_path.empty()) return prodkit::TemplateBank::defaults();
    return prodkit::TemplateBank::load_file(templates_path);
}

std::string task_file_name(prodkit::TaskKind k) {
    std::string name(to_string(k));
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return name + ".jsonl";
}

prodkit::bench::TaskSets load_task_sets(const std::string& dir) {
    prodkit::bench::TaskSets sets;
    bool any = false;
    for (auto kind : {prodkit::TaskKind::CG, prodkit::TaskKind::CC, prodkit::TaskKind::AI,
                      prodkit::TaskKind::AC, prodkit::TaskKind::CMC}) {
        fs::path path = fs::path(dir) / task_file_name(kind);
        if (!fs::exists(path)) continue;
        sets[kind] = prodkit::tasks::load_task_file(path.string());
        any = true;
    }
    if (!any) throw prodkit::IoError("no task files (cg.jsonl, ...) found under " + dir);
    return sets;
}

void write_task_file(const fs::path& path, const std::vector<prodkit::tasks::TaskSample>& samples) {
    auto out = prodkit::open_output(path.string());
    prodkit::JsonlWriter writer(out);
    for (const auto& s : samples) writer.write(prodkit::tasks::sample_to_json(s));
}

const prodkit::experts::ExpertSpec& require_role(const std::optional<prodkit::experts::ExpertSpec>& spec,
                                                 const char* what) {
    if (!spec) throw prodkit::ConfigError(std::string("expert config is missing the ") + what);
    return *spec;
}

prodkit::metrics::JudgeFn judge_fn(prodkit::experts::ExpertGateway& gateway,
                                   const prodkit::experts::ExpertSpec& judge) {
    return [&gateway, judge](std::string_view name, std::string_view ref, std::string_view cand) {
        return gateway.judge_equivalence(judge, name, ref, cand);
    };
}

std::vector<fs::path> repeat_run_dirs(const fs::path& base, int repeat) {
    std::vector<fs::path> dirs;
    if (repeat <= 1) {
        dirs.push_back(base);
    } else {
        for (int i = 1; i <= repeat; ++i) dirs.push_back(base / ("run-" + std::to_string(i)));
    }
    return dirs;
}

int cmd_ingest(const GlobalOpts&, const std::string& input, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto in = prodkit::open_input(input);
    prodkit::ProductReader reader(in);

    auto validated = prodkit::open_output((fs::path(out_dir) / "validated.jsonl").string());
    auto rejects = prodkit::open_output((fs::path(out_dir) / "rejects.jsonl").string());
    prodkit::JsonlWriter validated_writer(validated);
    prodkit::JsonlWriter rejects_writer(rejects);

    prodkit::StatsAccumulator acc;
    std::uint64_t kept = 0, rejected = 0;
    while (auto item = reader.next()) {
        if (auto* rec = std::get_if<prodkit::ProductRecord>(&*item)) {
            validated_writer.write(prodkit::record_to_json(*rec));
            acc.add(*rec);
            ++kept;
        } else {
            rejects_writer.write(prodkit::rejection_to_json(std::get<prodkit::Rejection>(*item)));
            ++rejected;
        }
    }

    auto stats = acc.finish();
    json stats_doc = prodkit::stats_to_json(stats);
    stats_doc["rejected"] = rejected;
    prodkit::write_json_file((fs::path(out_dir) / "stats.json").string(), stats_doc);

    std::cout << prodkit::stats_table(stats);
    std::cout << "validated=" << kept << " rejected=" << rejected << '\n';
    return kExitOk;
}

int cmd_stats(const GlobalOpts&, const std::string& input, const std::string& out_file) {
    auto corpus = prodkit::load_corpus_file(input);
    auto stats = prodkit::corpus_stats(corpus.records);
    if (!out_file.empty()) {
        prodkit::write_json_file(out_file, prodkit::stats_to_json(stats));
    }
    std::cout << prodkit::stats_table(stats);
    return kExitOk;
}

int cmd_filter(const GlobalOpts& globals, const std::string& input, const std::string& experts_path,
               const std::string& out_dir, double epsilon, std::optional<std::size_t> cap,
               const std::string& cap_mode) {
    auto cfg = prodkit::experts::load_expert_config(experts_path);
    prodkit::consensus::ExpertRoster roster{cfg.answerers};
    const auto& querier = require_role(cfg.querier, "querier");
    const auto& judge = require_role(cfg.judge, "judge");

    prodkit::consensus::FilterRunConfig run_config;
    run_config.epsilon = epsilon;
    run_config.attribute_cap = cap;
    run_config.cap_mode = prodkit::consensus::cap_mode_from(cap_mode);
    run_config.concurrency = globals.workers;
    run_config.seed = require_seed(globals);

    fs::create_directories(out_dir);
    auto in = prodkit::open_input(input);
    prodkit::ProductReader reader(in);

    auto clean = prodkit::open_output((fs::path(out_dir) / "clean.jsonl").string());
    auto filtered = prodkit::open_output((fs::path(out_dir) / "filtered.jsonl").string());
    auto indet = prodkit::open_output((fs::path(out_dir) / "indeterminate.jsonl").string());
    prodkit::JsonlWriter clean_writer(clean);
    prodkit::JsonlWriter filtered_writer(filtered);
    prodkit::JsonlWriter indet_writer(indet);

    prodkit::experts::ExpertGateway gateway;
    std::uint64_t reject_count = 0;
    prodkit::consensus::FilterSinks sinks{
        [&](const prodkit::ProductRecord& r) { clean_writer.write(prodkit::record_to_json(r)); },
        [&](const prodkit::consensus::AttributeVerdict& v) {
            filtered_writer.write(prodkit::consensus::verdict_to_json(v));
        },
        [&](const prodkit::consensus::AttributeVerdict& v) {
            indet_writer.write(prodkit::consensus::verdict_to_json(v));
        },
    };

    auto counts = prodkit::consensus::filter_corpus(
        [&]() -> std::optional<prodkit::ProductRecord> {
            while (auto item = reader.next()) {
                if (auto* rec = std::get_if<prodkit::ProductRecord>(&*item)) return *rec;
                ++reject_count;  // invalid rows are not re-validated here, only skipped
            }
            return std::nullopt;
        },
        roster, querier, judge, gateway, run_config, sinks);

    json manifest = prodkit::consensus::run_manifest(run_config, roster, querier, judge, counts);
    manifest["input"] = input;
    manifest["skipped_invalid_rows"] = reject_count;
    prodkit::write_json_file((fs::path(out_dir) / "manifest.json").string(), manifest);

    std::cout << "records " << counts.records_in << " -> " << counts.records_out
              << " (dropped " << counts.records_dropped << ")\n"
              << "attributes kept=" << counts.kept << " filtered=" << counts.filtered
              << " indeterminate=" << counts.indeterminate << " capped_out=" << counts.capped_out
              << '\n';

    std::uint64_t decided = counts.kept + counts.filtered;
    if (decided == 0 && counts.indeterminate > 0) {
        std::cerr << "error: every verdict is indeterminate; experts look unreachable\n";
        return kExitUpstream;
    }
    return kExitOk;
}

int cmd_build_tasks(const GlobalOpts& globals, const std::string& input,
                    const std::string& taxonomy_path, const std::string& templates_path,
                    const std::string& out_dir, double p_corrupt) {
    auto corpus = prodkit::load_corpus_file(input);
    auto bank = load_bank(templates_path);

    std::optional<prodkit::CategoryTaxonomy> taxonomy;
    if (!taxonomy_path.empty()) {
        taxonomy = prodkit::CategoryTaxonomy::load_file(taxonomy_path);
    } else {
        std::cerr << "warning: no taxonomy provided, skipping CMC\n";
    }

    prodkit::tasks::BuildConfig config;
    config.seed = require_seed(globals);
    config.p_corrupt = p_corrupt;

    auto build = prodkit::tasks::build_tasks(corpus.records, taxonomy ? &*taxonomy : nullptr,
                                             bank, config);

    fs::create_directories(out_dir);
    for (const auto& [kind, samples] : build.by_task) {
        if (kind == prodkit::TaskKind::CMC && !taxonomy) continue;
        write_task_file(fs::path(out_dir) / task_file_name(kind), samples);
    }

    json counts = prodkit::tasks::build_counts_json(build);
    counts["config"] = {{"seed", config.seed},
                        {"p_corrupt", config.p_corrupt},
                        {"templates", templates_path.empty() ? "builtin" : templates_path},
                        {"taxonomy", taxonomy_path}};
    prodkit::write_json_file((fs::path(out_dir) / "counts.json").string(), counts);
    std::cout << counts.dump(2) << '\n';
    return kExitOk;
}

int cmd_bench(const GlobalOpts& globals, const std::string& tasks_dir,
              const std::string& experts_path, int repeat) {
    if (globals.run_dir.empty()) {
        throw CLI::ValidationError("--run-dir", "bench needs a run directory");
    }
    auto cfg = prodkit::experts::load_expert_config(experts_path);
    const auto& candidate = require_role(cfg.candidate, "candidate");

    auto task_sets = load_task_sets(tasks_dir);
    prodkit::experts::ExpertGateway gateway;
    prodkit::bench::BenchConfig bench_config;
    bench_config.workers = globals.workers;

    json snapshot{
        {"tasks_dir", tasks_dir},
        {"candidate", prodkit::experts::expert_spec_to_json(candidate)},
        {"workers", globals.workers},
        {"repeat", repeat},
    };

    std::uint64_t total_requested = 0, total_ok = 0, total_refused = 0, total_failed = 0;
    for (const auto& dir : repeat_run_dirs(globals.run_dir, repeat)) {
        prodkit::bench::RunDir run_dir(dir);
        run_dir.write_config_once(snapshot);
        auto stats = prodkit::bench::run_benchmark(candidate, task_sets, gateway, bench_config, run_dir);
        total_requested += stats.requested;
        total_ok += stats.ok;
        total_refused += stats.refused;
        total_failed += stats.failed;
        std::cout << dir.string() << ": total=" << stats.total << " reused=" << stats.reused
                  << " ok=" << stats.ok << " refused=" << stats.refused
                  << " failed=" << stats.failed << '\n';
    }

    if (total_requested > 0 && total_ok + total_refused == 0) {
        std::cerr << "error: candidate endpoint produced no usable replies\n";
        return kExitUpstream;
    }
    return kExitOk;
}

int cmd_score(const GlobalOpts& globals, const std::string& tasks_dir,
              const std::string& experts_path, const std::string& domain_map_path) {
    if (globals.run_dir.empty()) {
        throw CLI::ValidationError("--run-dir", "score needs a run directory");
    }
    auto cfg = prodkit::experts::load_expert_config(experts_path);
    const auto& judge = require_role(cfg.judge, "judge");

    auto task_sets = load_task_sets(tasks_dir);
    prodkit::experts::ExpertGateway gateway;
    auto judge_callable = judge_fn(gateway, judge);
    prodkit::metrics::RefusalDetector detector;

    // A run dir either holds outputs.jsonl directly or run-1..run-N subdirs.
    std::vector<fs::path> run_dirs;
    fs::path base(globals.run_dir);
    if (fs::exists(base / "outputs.jsonl")) {
        run_dirs.push_back(base);
    } else {
        for (int i = 1;; ++i) {
            fs::path sub = base / ("run-" + std::to_string(i));
            if (!fs::exists(sub / "outputs.jsonl")) break;
            run_dirs.push_back(sub);
        }
    }
    if (run_dirs.empty()) {
        throw prodkit::IoError("no outputs.jsonl under " + globals.run_dir);
    }

    std::vector<std::vector<prodkit::metrics::MetricReport>> all_reports;
    for (const auto& dir : run_dirs) {
        auto outputs = prodkit::bench::RunDir::read_outputs(dir);
        auto scored = prodkit::bench::score_run(outputs, task_sets, judge_callable, detector);

        json reports = json::array();
        for (const auto& r : scored.reports) reports.push_back(prodkit::metrics::report_to_json(r));
        prodkit::write_json_file((dir / "reports.json").string(), reports);

        if (!domain_map_path.empty()) {
            auto domain_map = prodkit::bench::DomainMap::load_file(domain_map_path);
            auto rows = prodkit::bench::domain_split(scored.ai_samples, domain_map);
            prodkit::write_json_file((dir / "domains.json").string(),
                                     prodkit::bench::domain_rows_to_json(rows));
            for (const auto& row : rows) {
                std::cout << "AI " << row.domain << ": " << row.accuracy * 100.0 << "% ("
                          << row.samples << " samples)\n";
            }
        }
        all_reports.push_back(std::move(scored.reports));
    }

    std::vector<prodkit::bench::NamedReports> columns;
    if (all_reports.size() > 1) {
        auto mean = prodkit::bench::mean_reports(all_reports);
        json mean_doc = json::array();
        for (const auto& r : mean) mean_doc.push_back(prodkit::metrics::report_to_json(r));
        prodkit::write_json_file((base / "reports_mean.json").string(), mean_doc);
        for (std::size_t i = 0; i < all_reports.size(); ++i) {
            columns.push_back({"run-" + std::to_string(i + 1), all_reports[i]});
        }
        columns.push_back({"mean", mean});
    } else {
        columns.push_back({"run", all_reports[0]});
    }
    std::cout << prodkit::bench::render_table(columns, prodkit::bench::ReportLayout::standard());
    return kExitOk;
}

int cmd_report(const GlobalOpts&, const std::vector<std::string>& report_files,
               const std::string& out_prefix) {
    std::vector<prodkit::bench::NamedReports> columns;
    for (const auto& file : report_files) {
        json doc = prodkit::load_json_file(file);
        std::vector<prodkit::metrics::MetricReport> reports;
        for (const auto& r : doc) reports.push_back(prodkit::metrics::report_from_json(r));
        columns.push_back({fs::path(file).parent_path().filename().string().empty()
                               ? file
                               : fs::path(file).parent_path().filename().string(),
                           std::move(reports)});
    }
    auto layout = prodkit::bench::ReportLayout::standard();
    std::string table = prodkit::bench::render_table(columns, layout);
    std::cout << table;
    if (!out_prefix.empty()) {
        auto txt = prodkit::open_output(out_prefix + ".txt");
        txt << table;
        auto csv = prodkit::open_output(out_prefix + ".csv");
        csv << prodkit::bench::render_csv(columns, layout);
    }
    return kExitOk;
}

int cmd_ablation(const GlobalOpts& globals, const std::string& raw_path,
                 const std::string& clean_path, const std::string& templates_path,
                 const std::string& out_dir, std::size_t cap) {
    auto raw = prodkit::load_corpus_file(raw_path);
    auto clean = prodkit::load_corpus_file(clean_path);
    auto bank = load_bank(templates_path);

    prodkit::bench::AblationConfig config;
    config.seed = require_seed(globals);
    config.attribute_cap = cap;

    auto variants = prodkit::bench::build_ablation_variants(raw.records, clean.records, bank, config);

    fs::create_directories(out_dir);
    write_task_file(fs::path(out_dir) / "ai_with_hallu.jsonl", variants.with_hallucination);
    write_task_file(fs::path(out_dir) / "ai_without_hallu.jsonl", variants.without_hallucination);

    json summary{
        {"seed", config.seed},
        {"attribute_cap", config.attribute_cap},
        {"with_hallucination", variants.with_hallucination.size()},
        {"without_hallucination", variants.without_hallucination.size()},
    };
    prodkit::write_json_file((fs::path(out_dir) / "ablation.json").string(), summary);
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prodkit: product-understanding data curation and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");

    GlobalOpts globals;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "root random seed (required for dataset-producing commands)");
    app.add_option("--workers", globals.workers, "bounded parallelism width")->check(CLI::PositiveNumber);
    app.add_option("--run-dir", globals.run_dir, "benchmark run directory");

    std::string input, out_dir, out_file, experts_path, taxonomy_path, templates_path;
    std::string tasks_dir, domain_map_path, raw_path, clean_path, out_prefix, cap_mode = "original_order";
    std::vector<std::string> report_files;
    double epsilon = 0.6;
    double p_corrupt = 0.5;
    std::size_t cap_value = 0;
    std::size_t ablation_cap = 8;
    int repeat = 1;

    auto* ingest = app.add_subcommand("ingest", "validate a raw corpus and log rejections");
    ingest->add_option("--input", input, "raw corpus JSONL")->required();
    ingest->add_option("--out-dir", out_dir, "output directory")->required();

    auto* stats = app.add_subcommand("stats", "unique-item statistics for a corpus");
    stats->add_option("--input", input, "corpus JSONL")->required();
    stats->add_option("--out", out_file, "also write stats JSON here");

    auto* filter = app.add_subcommand("filter", "multi-expert consensus hallucination filtering");
    filter->add_option("--input", input, "validated corpus JSONL")->required();
    filter->add_option("--experts", experts_path, "expert roster config JSON")->required();
    filter->add_option("--out-dir", out_dir, "output directory")->required();
    filter->add_option("--epsilon", epsilon, "keep threshold (score >= epsilon keeps)");
    auto* cap_opt = filter->add_option("--cap", cap_value, "max surviving attributes per record");
    filter->add_option("--cap-mode", cap_mode, "original_order | seeded_random");

    auto* build = app.add_subcommand("build-tasks", "compile the five task datasets");
    build->add_option("--input", input, "clean corpus JSONL")->required();
    build->add_option("--taxonomy", taxonomy_path, "category taxonomy JSON (omit to skip CMC)");
    build->add_option("--templates", templates_path, "template bank JSON (default: builtin)");
    build->add_option("--out-dir", out_dir, "output directory")->required();
    build->add_option("--p-corrupt", p_corrupt, "AC corrupted-sample probability");

    auto* bench = app.add_subcommand("bench", "drive a candidate model over task sets");
    bench->add_option("--tasks-dir", tasks_dir, "directory with task JSONL files")->required();
    bench->add_option("--experts", experts_path, "expert config with a candidate entry")->required();
    bench->add_option("--repeat", repeat, "independent runs (mean reported by score)")
        ->check(CLI::PositiveNumber);

    auto* score = app.add_subcommand("score", "score a benchmark run");
    score->add_option("--tasks-dir", tasks_dir, "directory with gold task JSONL files")->required();
    score->add_option("--experts", experts_path, "expert config with a judge entry")->required();
    score->add_option("--domain-map", domain_map_path, "category-prefix to domain label JSON");

    auto* report = app.add_subcommand("report", "render report tables from reports.json files");
    report->add_option("--reports", report_files, "one or more reports.json files")->required();
    report->add_option("--out-prefix", out_prefix, "write <prefix>.txt and <prefix>.csv");

    auto* ablation = app.add_subcommand("ablation", "build paired with/without-hallucination AI sets");
    ablation->add_option("--raw", raw_path, "raw validated corpus JSONL")->required();
    ablation->add_option("--clean", clean_path, "filtered clean corpus JSONL")->required();
    ablation->add_option("--templates", templates_path, "template bank JSON (default: builtin)");
    ablation->add_option("--out-dir", out_dir, "output directory")->required();
    ablation->add_option("--cap", ablation_cap, "attribute cap per record");

    for (auto* sub : {ingest, stats, filter, build, bench, score, report, ablation}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (seed_opt->count() > 0) globals.seed = seed_value;

    try {
        if (ingest->parsed()) return cmd_ingest(globals, input, out_dir);
        if (stats->parsed()) return cmd_stats(globals, input, out_file);
        if (filter->parsed()) {
            std::optional<std::size_t> cap;
            if (cap_opt->count() > 0) cap = cap_value;
            return cmd_filter(globals, input, experts_path, out_dir, epsilon, cap, cap_mode);
        }
        if (build->parsed()) {
            return cmd_build_tasks(globals, input, taxonomy_path, templates_path, out_dir, p_corrupt);
        }
        if (bench->parsed()) return cmd_bench(globals, tasks_dir, experts_path, repeat);
        if (score->parsed()) return cmd_score(globals, tasks_dir, experts_path, domain_map_path);
        if (report->parsed()) return cmd_report(globals, report_files, out_prefix);
        if (ablation->parsed()) {
            return cmd_ablation(globals, raw_path, clean_path, templates_path, out_dir, ablation_cap);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const prodkit::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const prodkit::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const prodkit::TaxonomyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}
