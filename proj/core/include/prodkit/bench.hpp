#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prodkit/consensus.hpp"
#include "prodkit/corpus.hpp"
#include "prodkit/experts.hpp"
#include "prodkit/metrics.hpp"
#include "prodkit/tasks.hpp"

namespace prodkit::bench {

struct SampleOutput {
    std::string id;
    std::string raw_text;
    experts::AnswerStatus status = experts::AnswerStatus::TransportError;
    std::int64_t latency_ms = 0;
};

nlohmann::json output_to_json(const SampleOutput& o);
SampleOutput output_from_json(const nlohmann::json& doc);

using TaskSets = std::map<TaskKind, std::vector<tasks::TaskSample>>;

/// A benchmark run on disk: config snapshot, append-only outputs JSONL, and
/// run stats. One writer at a time, enforced with an exclusive lock file.
/// Raw outputs are persisted before any scoring so judges and metrics can be
/// re-run without re-querying the candidate.
class RunDir {
public:
    explicit RunDir(std::filesystem::path dir);
    ~RunDir();
    RunDir(const RunDir&) = delete;
    RunDir& operator=(const RunDir&) = delete;

    const std::filesystem::path& path() const { return dir_; }

    /// Writes config.json once; an existing snapshot is left untouched so
    /// resumed runs stay byte-identical.
    void write_config_once(const nlohmann::json& config);

    std::map<std::string, SampleOutput> load_outputs() const;
    void append_output(const SampleOutput& o);

    void write_stats(const nlohmann::json& stats);

    static std::map<std::string, SampleOutput> read_outputs(const std::filesystem::path& dir);

private:
    std::filesystem::path dir_;
    int lock_fd_ = -1;
};

struct BenchConfig {
    int workers = 1;
};

struct BenchRunStats {
    std::uint64_t total = 0;
    std::uint64_t reused = 0;  // already present from a previous partial run
    std::uint64_t requested = 0;
    std::uint64_t ok = 0;
    std::uint64_t refused = 0;
    std::uint64_t failed = 0;
    std::int64_t wall_ms = 0;
};

nlohmann::json stats_to_json(const BenchRunStats& s);

/// Drives the candidate over every task sample with the per-task evaluation
/// prompt. Raw text is stored verbatim; per-sample failures are recorded,
/// never fatal. Resumable: ids already in the run directory are not
/// re-requested. Scripted candidates produce byte-identical output files.
BenchRunStats run_benchmark(const experts::ExpertSpec& candidate, const TaskSets& task_sets,
                            experts::ExpertGateway& gateway, const BenchConfig& config,
                            RunDir& dir);

struct AiSampleResult {
    std::string id;
    bool scored = false;
    bool correct = false;
    std::vector<std::string> category;
};

struct ScoredRun {
    std::vector<metrics::MetricReport> reports;
    std::vector<AiSampleResult> ai_samples;
    bool partial = false;          // some gold ids had no output
    std::uint64_t missing = 0;
};

/// Scores a run against its gold task sets. Refused or failed outputs count
/// as refusals for AI (they may be right on Unknown golds) and as wrong
/// answers elsewhere. Outputs whose id matches no gold sample abort.
ScoredRun score_run(const std::map<std::string, SampleOutput>& outputs, const TaskSets& gold,
                    const metrics::JudgeFn& judge, const metrics::RefusalDetector& detector);

/// Leaf-category-path prefix -> primary domain label. Longest prefix wins;
/// unmapped paths go to "Other".
class DomainMap {
public:
    struct Entry {
        std::vector<std::string> prefix;
        std::string label;
    };

    static DomainMap from_json(const nlohmann::json& doc);
    static DomainMap load_file(const std::string& path);

    void add(std::vector<std::string> prefix, std::string label);
    std::string label_for(std::span<const std::string> path) const;

private:
    std::vector<Entry> entries_;
};

struct DomainRow {
    std::string domain;
    std::uint64_t samples = 0;  // scored AI samples in this domain
    double accuracy = 0.0;
};

/// Per-domain attribute-inference accuracy. Domain accuracies weighted by
/// their sample counts average back to the overall AI accuracy.
std::vector<DomainRow> domain_split(std::span<const AiSampleResult> ai_samples,
                                    const DomainMap& map);

nlohmann::json domain_rows_to_json(std::span<const DomainRow> rows);

struct AblationConfig {
    std::uint64_t seed = 0;
    std::size_t attribute_cap = 8;
};

struct AblationVariants {
    std::vector<tasks::TaskSample> with_hallucination;     // raw attributes, randomly capped
    std::vector<tasks::TaskSample> without_hallucination;  // filter survivors incl. Unknown, capped in order
};

/// Builds the paired ablation task sets from the raw corpus and the filter's
/// clean output. Both variants share the seed, so samples present in both
/// are byte-identical and diffs touch only the attribute subsets.
AblationVariants build_ablation_variants(std::span<const ProductRecord> raw_records,
                                         std::span<const ProductRecord> clean_records,
                                         const TemplateBank& bank, const AblationConfig& config);

struct ReportLayout {
    struct Row {
        TaskKind task;
        std::string metric;
        bool percent = false;  // render value * 100 with two decimals
    };
    std::vector<Row> rows;

    /// The standard benchmark table: caption metrics raw, rate metrics as
    /// percentages.
    static ReportLayout standard();
};

struct NamedReports {
    std::string label;
    std::vector<metrics::MetricReport> reports;
};

std::string render_table(std::span<const NamedReports> columns, const ReportLayout& layout);
std::string render_csv(std::span<const NamedReports> columns, const ReportLayout& layout);

/// Element-wise mean over repeated runs of the same task sets.
std::vector<metrics::MetricReport> mean_reports(std::span<const std::vector<metrics::MetricReport>> runs);

}  // namespace prodkit::bench
