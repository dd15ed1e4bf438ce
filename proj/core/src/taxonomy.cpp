#include "prodkit/taxonomy.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/text.hpp"

#include <unordered_set>

namespace prodkit {

CategoryTaxonomy CategoryTaxonomy::from_json(const nlohmann::json& doc) {
    CategoryTaxonomy tax;

    struct Frame {
        const nlohmann::json* node;
        std::int32_t parent;
    };
    std::vector<Frame> stack{{&doc, -1}};

    while (!stack.empty()) {
        auto [node, parent] = stack.back();
        stack.pop_back();

        if (!node->is_object() || !node->contains("name") || !(*node)["name"].is_string()) {
            throw TaxonomyError("taxonomy node must be an object with a string name");
        }
        std::string name = text::trim(text::nfc((*node)["name"].get<std::string>()));
        if (name.empty()) throw TaxonomyError("taxonomy node has an empty name");

        auto index = static_cast<std::int32_t>(tax.nodes_.size());
        tax.nodes_.push_back({std::move(name), parent, {}});
        if (parent >= 0) {
            tax.nodes_[static_cast<std::size_t>(parent)].children.push_back(index);
        } else if (index != 0) {
            throw TaxonomyError("taxonomy must have a single root");
        }

        if (auto it = node->find("children"); it != node->end()) {
            if (!it->is_array()) throw TaxonomyError("children must be an array");
            // Reverse push keeps document order after the stack pop.
            for (auto c = it->rbegin(); c != it->rend(); ++c) {
                stack.push_back({&*c, index});
            }
        }
    }

    for (const auto& n : tax.nodes_) {
        std::unordered_set<std::string_view> seen;
        for (auto c : n.children) {
            if (!seen.insert(tax.nodes_[static_cast<std::size_t>(c)].name).second) {
                throw TaxonomyError("duplicate sibling name: " + tax.nodes_[static_cast<std::size_t>(c)].name);
            }
        }
    }
    if (!tax.verify_acyclic()) throw TaxonomyError("taxonomy contains a cycle");
    return tax;
}

CategoryTaxonomy CategoryTaxonomy::load(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("invalid taxonomy JSON: ") + e.what());
    }
    return from_json(doc);
}

CategoryTaxonomy CategoryTaxonomy::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

std::optional<std::int32_t> CategoryTaxonomy::find(std::span<const std::string> path) const {
    if (path.empty() || nodes_.empty()) return std::nullopt;

    std::size_t start = 0;
    if (path[0] == nodes_[0].name) {
        if (path.size() == 1) return 0;
        start = 1;
    }

    std::int32_t current = 0;
    for (std::size_t i = start; i < path.size(); ++i) {
        const auto& children = nodes_[static_cast<std::size_t>(current)].children;
        std::int32_t next = -1;
        for (auto c : children) {
            if (nodes_[static_cast<std::size_t>(c)].name == path[i]) {
                next = c;
                break;
            }
        }
        if (next < 0) return std::nullopt;
        current = next;
    }
    return current;
}

bool CategoryTaxonomy::contains_path(std::span<const std::string> path) const {
    return find(path).has_value();
}

std::optional<std::vector<std::string>> CategoryTaxonomy::siblings(std::span<const std::string> path) const {
    auto node = find(path);
    if (!node) return std::nullopt;
    std::vector<std::string> out;
    auto parent = nodes_[static_cast<std::size_t>(*node)].parent;
    if (parent < 0) return out;
    for (auto c : nodes_[static_cast<std::size_t>(parent)].children) {
        if (c != *node) out.push_back(nodes_[static_cast<std::size_t>(c)].name);
    }
    return out;
}

std::vector<std::vector<std::string>> CategoryTaxonomy::leaf_paths() const {
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!nodes_[i].children.empty()) continue;
        std::vector<std::string> path;
        for (std::int32_t n = static_cast<std::int32_t>(i); n >= 0; n = nodes_[static_cast<std::size_t>(n)].parent) {
            path.push_back(nodes_[static_cast<std::size_t>(n)].name);
        }
        std::reverse(path.begin(), path.end());
        out.push_back(std::move(path));
    }
    return out;
}

bool CategoryTaxonomy::verify_acyclic() const {
    const auto limit = nodes_.size();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        std::size_t steps = 0;
        std::int32_t n = static_cast<std::int32_t>(i);
        while (n != 0) {
            n = nodes_[static_cast<std::size_t>(n)].parent;
            if (n < 0) return false;  // detached from root
            if (++steps > limit) return false;
        }
    }
    return true;
}

}  // namespace prodkit
