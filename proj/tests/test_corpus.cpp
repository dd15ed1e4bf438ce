#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "prodkit/corpus.hpp"
#include "prodkit/errors.hpp"
#include "prodkit/taxonomy.hpp"

using namespace prodkit;
using nlohmann::json;

namespace {

json valid_doc() {
    return json{
        {"id", "p1"},
        {"image", "img/p1.jpg"},
        {"caption", "Red Silk Scarf"},
        {"category", json::array({"Apparel", "Scarves"})},
        {"attributes", json::array({{{"name", "Color"}, {"value", "Red"}}})},
    };
}

}  // namespace

TEST_CASE("validate_record accepts a fully populated record unchanged") {
    auto result = validate_record(valid_doc());
    auto* rec = std::get_if<ProductRecord>(&result);
    REQUIRE(rec != nullptr);
    CHECK(rec->id == "p1");
    CHECK(rec->caption == "Red Silk Scarf");
    CHECK(rec->category_path == std::vector<std::string>{"Apparel", "Scarves"});
    REQUIRE(rec->attributes.size() == 1);
    CHECK(rec->attributes[0] == AttributePair{"Color", "Red"});
}

TEST_CASE("validate_record is idempotent") {
    auto first = validate_record(valid_doc());
    auto* rec = std::get_if<ProductRecord>(&first);
    REQUIRE(rec != nullptr);
    auto second = validate_record(record_to_json(*rec));
    auto* again = std::get_if<ProductRecord>(&second);
    REQUIRE(again != nullptr);
    CHECK(*again == *rec);
}

TEST_CASE("validate_record rejection reasons") {
    auto doc = valid_doc();

    SUBCASE("empty category list") {
        doc["category"] = json::array();
        auto r = std::get<Rejection>(validate_record(doc));
        CHECK(r.reason == RejectReason::MissingCategory);
    }
    SUBCASE("blank caption") {
        doc["caption"] = "   ";
        auto r = std::get<Rejection>(validate_record(doc));
        CHECK(r.reason == RejectReason::MissingCaption);
    }
    SUBCASE("no attributes") {
        doc["attributes"] = json::array();
        auto r = std::get<Rejection>(validate_record(doc));
        CHECK(r.reason == RejectReason::NoAttributes);
    }
    SUBCASE("attribute with empty value") {
        doc["attributes"] = json::array({{{"name", "Color"}, {"value", "  "}}});
        auto r = std::get<Rejection>(validate_record(doc));
        CHECK(r.reason == RejectReason::MalformedField);
    }
    SUBCASE("missing image") {
        doc.erase("image");
        auto r = std::get<Rejection>(validate_record(doc));
        CHECK(r.reason == RejectReason::MalformedField);
    }
}

TEST_CASE("duplicate attribute names are retained at ingest") {
    auto doc = valid_doc();
    doc["attributes"] = json::array({
        {{"name", "Color"}, {"value", "Red"}},
        {{"name", "Color"}, {"value", "Green"}},
    });
    auto rec = std::get<ProductRecord>(validate_record(doc));
    REQUIRE(rec.attributes.size() == 2);
    CHECK(rec.attributes[0].name == "Color");
    CHECK(rec.attributes[1].name == "Color");
}

TEST_CASE("strings are NFC-normalized at ingest") {
    auto doc = valid_doc();
    doc["caption"] = "Cafe\xcc\x81 mug";                      // decomposed
    doc["attributes"][0]["value"] = "Cafe\xcc\x81";
    auto rec = std::get<ProductRecord>(validate_record(doc));
    CHECK(rec.caption == "Caf\xc3\xa9 mug");                   // precomposed
    CHECK(rec.attributes[0].value == "Caf\xc3\xa9");
}

TEST_CASE("load_products: malformed line becomes a rejection with its position") {
    std::istringstream in(
        R"({"id":"a","image":"i.jpg","caption":"A","category":["C"],"attributes":[{"name":"n","value":"v"}]})"
        "\n"
        "garbage\n"
        R"({"id":"b","image":"i.jpg","caption":"B","category":["C"],"attributes":[{"name":"n","value":"v"}]})"
        "\n");
    ProductReader reader(in);

    auto first = reader.next();
    REQUIRE(first);
    CHECK(std::holds_alternative<ProductRecord>(*first));

    auto second = reader.next();
    REQUIRE(second);
    auto& rej = std::get<Rejection>(*second);
    CHECK(rej.line == 2);
    CHECK(rej.reason == RejectReason::MalformedField);

    auto third = reader.next();
    REQUIRE(third);
    CHECK(std::get<ProductRecord>(*third).id == "b");

    CHECK_FALSE(reader.next());
}

TEST_CASE("load_products: empty stream and order preservation") {
    std::istringstream empty("");
    ProductReader r1(empty);
    CHECK_FALSE(r1.next());

    std::ostringstream lines;
    for (int i = 0; i < 5; ++i) {
        lines << R"({"id":"p)" << i
              << R"(","image":"i.jpg","caption":"C","category":["X"],"attributes":[{"name":"n","value":"v"}]})"
              << '\n';
    }
    std::istringstream in(lines.str());
    ProductReader r2(in);
    for (int i = 0; i < 5; ++i) {
        auto item = r2.next();
        REQUIRE(item);
        CHECK(std::get<ProductRecord>(*item).id == "p" + std::to_string(i));
    }
    CHECK_FALSE(r2.next());
}

TEST_CASE("corpus_stats counts unique items") {
    auto make = [](std::string id, std::vector<std::pair<std::string, std::string>> attrs) {
        ProductRecord r;
        r.id = std::move(id);
        r.image_ref = "i.jpg";
        r.caption = "c";
        r.category_path = {"Root", "Leaf"};
        for (auto& [n, v] : attrs) r.attributes.push_back({n, v});
        return r;
    };

    SUBCASE("two products sharing one attribute pair") {
        std::vector<ProductRecord> records{make("a", {{"Color", "Red"}}),
                                           make("b", {{"Color", "Red"}})};
        auto s = corpus_stats(records);
        CHECK(s.products == 2);
        CHECK(s.attributes == 1);
        CHECK(s.attribute_names == 1);
        CHECK(s.attribute_values == 1);
        CHECK(s.categories == 1);
    }
    SUBCASE("empty corpus") {
        auto s = corpus_stats({});
        CHECK(s == CorpusStats{});
    }
    SUBCASE("one product, three distinct attributes") {
        std::vector<ProductRecord> records{
            make("a", {{"Color", "Red"}, {"Size", "L"}, {"Material", "Silk"}})};
        auto s = corpus_stats(records);
        CHECK(s.products == 1);
        CHECK(s.attributes == 3);
    }
}

TEST_CASE("corpus_stats is permutation-invariant and merges associatively") {
    std::vector<ProductRecord> records;
    std::mt19937 gen(7);
    for (int i = 0; i < 20; ++i) {
        ProductRecord r;
        r.id = "p" + std::to_string(i);
        r.image_ref = "i.jpg";
        r.caption = "c";
        r.category_path = {"Root", "Leaf" + std::to_string(i % 3)};
        r.attributes.push_back({"Color", i % 2 ? "Red" : "Blue"});
        r.attributes.push_back({"N" + std::to_string(i % 5), "V" + std::to_string(i % 7)});
        records.push_back(std::move(r));
    }
    auto base = corpus_stats(records);

    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(corpus_stats(shuffled) == base);

    StatsAccumulator left, right;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (i % 2 ? left : right).add(records[i]);
    }
    left.merge(right);
    CHECK(left.finish() == base);
}

TEST_CASE("taxonomy: siblings and leaf queries") {
    json doc{
        {"name", "root"},
        {"children",
         json::array({json{{"name", "Hair Accessories"},
                           {"children", json::array({json{{"name", "Headband"}},
                                                     json{{"name", "Hair Ties"}}})}}})},
    };
    auto tax = CategoryTaxonomy::from_json(doc);
    CHECK(tax.node_count() == 4);
    CHECK(tax.verify_acyclic());

    std::vector<std::string> path{"Hair Accessories", "Headband"};
    auto sibs = tax.siblings(path);
    REQUIRE(sibs);
    CHECK(*sibs == std::vector<std::string>{"Hair Ties"});

    // Paths may also start at the root name.
    std::vector<std::string> rooted{"root", "Hair Accessories", "Headband"};
    CHECK(tax.contains_path(rooted));
    CHECK_FALSE(tax.contains_path(std::vector<std::string>{"Nope"}));
}

TEST_CASE("taxonomy: single root with no children") {
    auto tax = CategoryTaxonomy::from_json(json{{"name", "root"}});
    CHECK(tax.node_count() == 1);
    auto leaves = tax.leaf_paths();
    REQUIRE(leaves.size() == 1);
    CHECK(leaves[0] == std::vector<std::string>{"root"});
    CHECK(tax.siblings(std::vector<std::string>{"root"})->empty());
}

TEST_CASE("taxonomy: twelve siblings are all reported") {
    json children = json::array();
    for (int i = 0; i < 12; ++i) children.push_back(json{{"name", "S" + std::to_string(i)}});
    auto tax = CategoryTaxonomy::from_json(
        json{{"name", "root"}, {"children", json::array({json{{"name", "Mid"}, {"children", children}}})}});
    std::vector<std::string> path{"Mid", "S0"};
    auto sibs = tax.siblings(path);
    REQUIRE(sibs);
    CHECK(sibs->size() == 11);
}

TEST_CASE("taxonomy: duplicate siblings abort the load") {
    json doc{{"name", "root"},
             {"children", json::array({json{{"name", "A"}}, json{{"name", "A"}}})}};
    CHECK_THROWS_AS(CategoryTaxonomy::from_json(doc), TaxonomyError);
}

TEST_CASE("taxonomy: parent walks reach the root within depth steps") {
    json doc{{"name", "r"},
             {"children",
              json::array({json{{"name", "a"},
                                {"children", json::array({json{{"name", "b"},
                                                               {"children", json::array({json{{"name", "c"}}})}}})}}})}};
    auto tax = CategoryTaxonomy::from_json(doc);
    CHECK(tax.verify_acyclic());
}
