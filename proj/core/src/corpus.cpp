#include "prodkit/corpus.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/text.hpp"

#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

namespace prodkit {

namespace {

std::string clean(std::string_view s) { return text::trim(text::nfc(s)); }

std::string joined_path(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& seg : path) {
        if (!out.empty()) out.push_back('\x1f');  // unit separator, cannot appear in trimmed names
        out += seg;
    }
    return out;
}

Rejection reject(RejectReason reason, std::string id, std::string detail) {
    Rejection r;
    r.id = std::move(id);
    r.reason = reason;
    r.detail = std::move(detail);
    return r;
}

}  // namespace

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::MissingCaption: return "missing_caption";
        case RejectReason::MissingCategory: return "missing_category";
        case RejectReason::NoAttributes: return "no_attributes";
        case RejectReason::MalformedField: return "malformed_field";
    }
    return "unknown";
}

RecordOrReject validate_record(const nlohmann::json& raw) {
    if (!raw.is_object()) {
        return reject(RejectReason::MalformedField, "", "document is not an object");
    }

    std::string id;
    if (auto it = raw.find("id"); it != raw.end() && it->is_string()) {
        id = clean(it->get<std::string>());
    }
    if (id.empty()) {
        return reject(RejectReason::MalformedField, "", "missing or empty id");
    }

    ProductRecord rec;
    rec.id = id;

    if (auto it = raw.find("image"); it != raw.end() && it->is_string()) {
        rec.image_ref = text::trim(it->get<std::string>());
    }
    if (rec.image_ref.empty()) {
        return reject(RejectReason::MalformedField, id, "missing or empty image");
    }

    if (auto it = raw.find("caption"); it != raw.end() && it->is_string()) {
        rec.caption = clean(it->get<std::string>());
    } else if (auto jt = raw.find("caption"); jt != raw.end() && !jt->is_string()) {
        return reject(RejectReason::MalformedField, id, "caption is not a string");
    }
    if (rec.caption.empty()) {
        return reject(RejectReason::MissingCaption, id, "caption empty after trimming");
    }

    auto cat = raw.find("category");
    if (cat == raw.end() || !cat->is_array() || cat->empty()) {
        return reject(RejectReason::MissingCategory, id, "category missing or empty");
    }
    for (const auto& seg : *cat) {
        if (!seg.is_string()) {
            return reject(RejectReason::MalformedField, id, "category segment is not a string");
        }
        std::string name = clean(seg.get<std::string>());
        if (name.empty()) {
            return reject(RejectReason::MissingCategory, id, "empty category segment");
        }
        rec.category_path.push_back(std::move(name));
    }

    auto attrs = raw.find("attributes");
    if (attrs == raw.end() || !attrs->is_array()) {
        return reject(RejectReason::NoAttributes, id, "attributes missing");
    }
    for (const auto& a : *attrs) {
        if (!a.is_object() || !a.contains("name") || !a.contains("value") ||
            !a["name"].is_string() || !a["value"].is_string()) {
            return reject(RejectReason::MalformedField, id, "attribute is not a {name, value} pair");
        }
        AttributePair pair{clean(a["name"].get<std::string>()), clean(a["value"].get<std::string>())};
        if (pair.name.empty() || pair.value.empty()) {
            return reject(RejectReason::MalformedField, id, "attribute name or value empty after trimming");
        }
        // Duplicate names are retained on purpose; filtering happens per pair
        // downstream, not per name.
        rec.attributes.push_back(std::move(pair));
    }
    if (rec.attributes.empty()) {
        return reject(RejectReason::NoAttributes, id, "validated records require at least one attribute");
    }

    if (auto it = raw.find("filtered_attribute_names"); it != raw.end() && it->is_array()) {
        for (const auto& n : *it) {
            if (!n.is_string()) {
                return reject(RejectReason::MalformedField, id, "filtered_attribute_names entry is not a string");
            }
            rec.filtered_attribute_names.push_back(clean(n.get<std::string>()));
        }
    }

    return rec;
}

nlohmann::json record_to_json(const ProductRecord& r) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : r.attributes) {
        attrs.push_back({{"name", a.name}, {"value", a.value}});
    }
    nlohmann::json doc{
        {"id", r.id},
        {"image", r.image_ref},
        {"caption", r.caption},
        {"category", r.category_path},
        {"attributes", attrs},
    };
    if (!r.filtered_attribute_names.empty()) {
        doc["filtered_attribute_names"] = r.filtered_attribute_names;
    }
    return doc;
}

nlohmann::json rejection_to_json(const Rejection& r) {
    return nlohmann::json{
        {"line", r.line},
        {"id", r.id},
        {"reason", std::string(to_string(r.reason))},
        {"detail", r.detail},
    };
}

struct ProductReader::Impl {
    explicit Impl(std::istream& in) : reader(in) {}
    JsonlReader reader;
};

ProductReader::ProductReader(std::istream& in) : impl_(std::make_shared<Impl>(in)) {}

std::optional<RecordOrReject> ProductReader::next() {
    auto line = impl_->reader.next();
    if (!line) return std::nullopt;

    nlohmann::json doc = nlohmann::json::parse(line->raw, nullptr, false);
    if (doc.is_discarded()) {
        Rejection r;
        r.line = line->number;
        r.reason = RejectReason::MalformedField;
        r.detail = "invalid JSON";
        return RecordOrReject{std::move(r)};
    }

    RecordOrReject result = validate_record(doc);
    if (auto* rej = std::get_if<Rejection>(&result)) rej->line = line->number;
    return result;
}

LoadedCorpus load_corpus_file(const std::string& path) {
    auto in = open_input(path);
    ProductReader reader(in);
    LoadedCorpus out;
    while (auto item = reader.next()) {
        if (auto* rec = std::get_if<ProductRecord>(&*item)) {
            out.records.push_back(std::move(*rec));
        } else {
            out.rejections.push_back(std::get<Rejection>(*item));
        }
    }
    return out;
}

struct StatsAccumulator::Sets {
    std::unordered_set<std::string> products;
    std::set<std::pair<std::string, std::string>> attribute_pairs;
    std::unordered_set<std::string> attribute_names;
    std::unordered_set<std::string> attribute_values;
    std::unordered_set<std::string> categories;
};

std::shared_ptr<StatsAccumulator::Sets> StatsAccumulator::make_sets() {
    return std::make_shared<Sets>();
}

void StatsAccumulator::add(const ProductRecord& r) {
    sets_->products.insert(r.id);
    for (const auto& a : r.attributes) {
        sets_->attribute_pairs.insert({a.name, a.value});
        sets_->attribute_names.insert(a.name);
        sets_->attribute_values.insert(a.value);
    }
    sets_->categories.insert(joined_path(r.category_path));
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    sets_->products.insert(other.sets_->products.begin(), other.sets_->products.end());
    sets_->attribute_pairs.insert(other.sets_->attribute_pairs.begin(), other.sets_->attribute_pairs.end());
    sets_->attribute_names.insert(other.sets_->attribute_names.begin(), other.sets_->attribute_names.end());
    sets_->attribute_values.insert(other.sets_->attribute_values.begin(), other.sets_->attribute_values.end());
    sets_->categories.insert(other.sets_->categories.begin(), other.sets_->categories.end());
}

CorpusStats StatsAccumulator::finish() const {
    CorpusStats s;
    s.products = sets_->products.size();
    s.attributes = sets_->attribute_pairs.size();
    s.attribute_names = sets_->attribute_names.size();
    s.attribute_values = sets_->attribute_values.size();
    s.categories = sets_->categories.size();
    return s;
}

CorpusStats corpus_stats(std::span<const ProductRecord> records) {
    StatsAccumulator acc;
    for (const auto& r : records) acc.add(r);
    return acc.finish();
}

nlohmann::json stats_to_json(const CorpusStats& s) {
    return nlohmann::json{
        {"products", s.products},
        {"attributes", s.attributes},
        {"attribute_names", s.attribute_names},
        {"attribute_values", s.attribute_values},
        {"categories", s.categories},
        {"meta", {{"category_counting", "distinct-leaf-paths"}}},
    };
}

std::string stats_table(const CorpusStats& s) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "Statistical Item" << "Count\n";
    auto row = [&](std::string_view name, std::uint64_t v) {
        out << std::left << std::setw(18) << name << v << '\n';
    };
    row("Products", s.products);
    row("Attributes", s.attributes);
    row("Attribute names", s.attribute_names);
    row("Attribute values", s.attribute_values);
    row("Categories", s.categories);
    return out.str();
}

}  // namespace prodkit
