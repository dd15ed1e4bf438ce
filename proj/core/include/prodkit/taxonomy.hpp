#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prodkit {

/// Category taxonomy tree: single root, acyclic, sibling names unique.
/// Queries accept full category paths; a leading segment equal to the root
/// name is optional, so "root/A/B" and "A/B" resolve to the same node.
class CategoryTaxonomy {
public:
    /// Parses a recursive {"name": ..., "children": [...]} document.
    /// Throws TaxonomyError on empty names, duplicate siblings or cycles.
    static CategoryTaxonomy from_json(const nlohmann::json& doc);
    static CategoryTaxonomy load(std::istream& in);
    static CategoryTaxonomy load_file(const std::string& path);

    const std::string& root_name() const { return nodes_[0].name; }
    std::size_t node_count() const { return nodes_.size(); }

    bool contains_path(std::span<const std::string> path) const;

    /// Names of the node's siblings (other children of its parent), in
    /// document order. nullopt when the path does not resolve. The root has
    /// no siblings.
    std::optional<std::vector<std::string>> siblings(std::span<const std::string> path) const;

    /// All leaf paths (root excluded from the path prefix), document order.
    std::vector<std::vector<std::string>> leaf_paths() const;

    /// Walks parent links from every node and checks the root is reached in
    /// at most node_count() steps.
    bool verify_acyclic() const;

private:
    struct Node {
        std::string name;
        std::int32_t parent = -1;
        std::vector<std::int32_t> children;
    };

    std::optional<std::int32_t> find(std::span<const std::string> path) const;

    std::vector<Node> nodes_;
};

}  // namespace prodkit
