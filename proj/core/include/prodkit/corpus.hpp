#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace prodkit {

/// One product attribute: a (name, value) pair. Both sides are non-empty
/// after trimming; name == value is allowed.
struct AttributePair {
    std::string name;
    std::string value;

    friend bool operator==(const AttributePair&, const AttributePair&) = default;
};

/// One validated product sample: image reference, caption, category path
/// from root to leaf, and the attribute list. `filtered_attribute_names` is
/// empty on ingest and populated by the consensus filter for downstream
/// "Unknown" task samples.
struct ProductRecord {
    std::string id;
    std::string image_ref;
    std::string caption;
    std::vector<std::string> category_path;
    std::vector<AttributePair> attributes;
    std::vector<std::string> filtered_attribute_names;

    friend bool operator==(const ProductRecord&, const ProductRecord&) = default;
};

enum class RejectReason {
    MissingCaption,
    MissingCategory,
    NoAttributes,
    MalformedField,
};

std::string_view to_string(RejectReason r);

/// A rejected raw record. Rejections are data, not failures: they are logged
/// with machine-readable reasons so raw-vs-clean statistics stay recomputable.
struct Rejection {
    std::size_t line = 0;  // 0 when not read from a stream
    std::string id;        // best-effort, may be empty
    RejectReason reason = RejectReason::MalformedField;
    std::string detail;
};

using RecordOrReject = std::variant<ProductRecord, Rejection>;

/// Validates one raw document against the record invariants. String fields
/// are NFC-normalized and trimmed so equality is stable downstream.
/// Idempotent: a record that already passed comes back unchanged.
RecordOrReject validate_record(const nlohmann::json& raw);

nlohmann::json record_to_json(const ProductRecord& r);
nlohmann::json rejection_to_json(const Rejection& r);

/// Streaming loader over line-delimited JSON. Order-preserving and
/// constant-memory; one reader per stream. Unparseable lines come back as
/// rejections; only stream-level failures throw (IoError with the last good
/// line).
class ProductReader {
public:
    explicit ProductReader(std::istream& in);

    std::optional<RecordOrReject> next();

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Reads every record from a JSONL file, collecting rejections separately.
struct LoadedCorpus {
    std::vector<ProductRecord> records;
    std::vector<Rejection> rejections;
};
LoadedCorpus load_corpus_file(const std::string& path);

/// Unique-item counts over a record sequence, one per statistical item of
/// the corpus summary: products, attribute pairs, attribute names, attribute
/// values, categories. Categories count distinct full leaf paths; the choice
/// is recorded in output metadata.
struct CorpusStats {
    std::uint64_t products = 0;
    std::uint64_t attributes = 0;
    std::uint64_t attribute_names = 0;
    std::uint64_t attribute_values = 0;
    std::uint64_t categories = 0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Shardable accumulator behind corpus_stats. merge() makes the computation
/// associative; results are permutation-invariant over the input order.
class StatsAccumulator {
public:
    void add(const ProductRecord& r);
    void merge(const StatsAccumulator& other);
    CorpusStats finish() const;

private:
    struct Sets;
    std::shared_ptr<Sets> sets_ = make_sets();
    static std::shared_ptr<Sets> make_sets();
};

CorpusStats corpus_stats(std::span<const ProductRecord> records);

nlohmann::json stats_to_json(const CorpusStats& s);
std::string stats_table(const CorpusStats& s);

}  // namespace prodkit
