#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prodkit/errors.hpp"
#include "prodkit/rng.hpp"
#include "prodkit/templates.hpp"

using namespace prodkit;

TEST_CASE("render_prompt substitutes plain slots") {
    PromptTemplate tpl{"t", "test", "Hello {name}, you asked about {topic}."};
    CHECK(render_prompt(tpl, {{"name", "Ada"}, {"topic", "metrics"}}) ==
          "Hello Ada, you asked about metrics.");
    CHECK_THROWS_AS(render_prompt(tpl, {{"name", "Ada"}}), ConfigError);
}

TEST_CASE("question generation prompt carries the exemplar") {
    auto rendered = render_prompt(prompts::question_gen(),
                                  {{"caption", "WiFi Security Camera"},
                                   {"attr_name", "Supported Mobile Systems"},
                                   {"attr_value", "Android"}});
    CHECK(rendered.find("What is the supported mobile systems of the camera?") != std::string::npos);
    CHECK(rendered.find("Product name: <WiFi Security Camera>.") != std::string::npos);
    CHECK(rendered.find("should not contain the attribute value") != std::string::npos);
}

TEST_CASE("answer check prompt asks for yes or no") {
    auto rendered = render_prompt(prompts::answer_check(), {{"attr_name", "Gender"},
                                                            {"reference", "WOMEN"},
                                                            {"candidate", "women"}});
    CHECK(rendered.find("Simply respond with \"yes\"") != std::string::npos);
    CHECK(rendered.find("Reference attribute value: <WOMEN>.") != std::string::npos);
    CHECK(rendered.find("Judgement:") != std::string::npos);
}

TEST_CASE("fallback question folds the attribute name") {
    CHECK(prompts::fallback_question("Supported Mobile Systems") ==
          "What is the supported mobile systems of the product?");
}

TEST_CASE("render_task_template wraps extractable slots") {
    TaskTemplate tpl{"t", "It best fits into category <{choice}>."};
    auto rendered = render_task_template(tpl, {{"choice", "2: Headband"}});
    CHECK(rendered.text == "It best fits into category <2: Headband>.");
    REQUIRE(rendered.extracted.size() == 1);
    CHECK(rendered.extracted[0] == "2: Headband");
}

TEST_CASE("template with no extractable slots yields no brackets") {
    TaskTemplate tpl{"t", "The value is {value}."};
    auto rendered = render_task_template(tpl, {{"value", "plain"}});
    CHECK(rendered.text == "The value is plain.");
    CHECK(rendered.extracted.empty());
    CHECK(extract_bracketed(rendered.text).empty());
}

TEST_CASE("extract_bracketed basics") {
    CHECK(extract_bracketed("It best fits into category <2: Headband>.") ==
          std::vector<std::string>{"2: Headband"});
    CHECK(extract_bracketed("no brackets here").empty());
    CHECK(extract_bracketed("a <x> b <y>") == std::vector<std::string>{"x", "y"});
    CHECK(extract_bracketed("unmatched < only").empty());
    CHECK(extract_bracketed("> unmatched close <x>") == std::vector<std::string>{"x"});
    // A fresh '<' restarts the capture: the innermost pair wins.
    CHECK(extract_bracketed("a <b <c> d>") == std::vector<std::string>{"c"});
}

TEST_CASE("values containing angle brackets round-trip through escaping") {
    TaskTemplate tpl{"t", "The attribute value might be <{value}>."};
    SUBCASE("literal angle brackets") {
        auto rendered = render_task_template(tpl, {{"value", "a < b > c"}});
        CHECK(extract_bracketed(rendered.text) == std::vector<std::string>{"a < b > c"});
    }
    SUBCASE("backslashes") {
        auto rendered = render_task_template(tpl, {{"value", R"(C:\path\<dir>)"}});
        CHECK(extract_bracketed(rendered.text) == std::vector<std::string>{R"(C:\path\<dir>)"});
    }
    SUBCASE("random adversarial values") {
        SeededRng rng(99);
        const std::string alphabet = "ab<>\\ {}";
        for (int i = 0; i < 200; ++i) {
            std::string value;
            auto len = rng.below(12) + 1;
            for (std::uint64_t k = 0; k < len; ++k) {
                value.push_back(alphabet[rng.pick_index(alphabet.size())]);
            }
            if (value.find('{') != std::string::npos) continue;  // slot syntax, not value escaping
            auto rendered = render_task_template(tpl, {{"value", value}});
            auto extracted = extract_bracketed(rendered.text);
            REQUIRE(extracted.size() == 1);
            CHECK(extracted[0] == value);
        }
    }
}

TEST_CASE("render_conversation returns assistant-side gold values in order") {
    TaskTemplate instruction{"i", "Is <{attr_name}> correct?"};
    TaskTemplate response{"r", "No, the product's <{attr_name}> attribute is <{correct_value}>."};
    auto conv = render_conversation(instruction, response,
                                    {{"attr_name", "Material"}, {"correct_value", "Metal"}});
    CHECK(conv.user_text == "Is <Material> correct?");
    CHECK(conv.assistant_text == "No, the product's <Material> attribute is <Metal>.");
    CHECK(conv.gold_values == std::vector<std::string>{"Material", "Metal"});
    CHECK(extract_bracketed(conv.assistant_text) == conv.gold_values);
}

TEST_CASE("default bank validates and serializes round-trip") {
    const auto& bank = TemplateBank::defaults();
    CHECK_NOTHROW(bank.validate());

    auto doc = bank.to_json();
    auto reloaded = TemplateBank::from_json(doc);
    CHECK(reloaded.to_json() == doc);

    // Advertised density: roughly 15 instructions and 10 responses per task.
    for (TaskKind k : {TaskKind::CG, TaskKind::CC, TaskKind::AI, TaskKind::AC, TaskKind::CMC}) {
        const auto& t = bank.for_task(k);
        CHECK(t.instructions.size() == 15);
        CHECK(t.responses.size() == 10);
    }
    CHECK(bank.for_task(TaskKind::AC).responses_incorrect.size() == 10);
}

TEST_CASE("bank validation rejects out-of-vocabulary slots") {
    auto doc = TemplateBank::defaults().to_json();
    doc["tasks"]["CG"]["responses"][0]["text"] = "A caption is <{bogus_slot}>.";
    CHECK_THROWS_AS(TemplateBank::from_json(doc), ConfigError);
}

TEST_CASE("bank validation enforces the AC yes/no contract") {
    auto doc = TemplateBank::defaults().to_json();
    SUBCASE("correct responses must lead with yes") {
        doc["tasks"]["AC"]["responses_correct"][0]["text"] = "Sure, <{shown_value}> is right.";
        CHECK_THROWS_AS(TemplateBank::from_json(doc), ConfigError);
    }
    SUBCASE("incorrect responses must end extractables with the correction") {
        doc["tasks"]["AC"]["responses_incorrect"][0]["text"] =
            "No, <{correct_value}> is the value of <{attr_name}>.";
        CHECK_THROWS_AS(TemplateBank::from_json(doc), ConfigError);
    }
}

TEST_CASE("every default template renders against its slot set") {
    const auto& bank = TemplateBank::defaults();
    SlotMap all{{"caption", "Cap"},      {"features", "F"},      {"base_caption", "Base"},
                {"attr_name", "Name"},   {"value", "Val"},       {"shown_value", "Shown"},
                {"correct_value", "Corr"}, {"options", "1: <A>"}, {"choice", "1: A"}};
    for (TaskKind k : {TaskKind::CG, TaskKind::CC, TaskKind::AI, TaskKind::AC, TaskKind::CMC}) {
        const auto& t = bank.for_task(k);
        for (const auto& tpl : t.instructions) CHECK_NOTHROW(render_task_template(tpl, all));
        for (const auto& tpl : t.responses) CHECK_NOTHROW(render_task_template(tpl, all));
        for (const auto& tpl : t.responses_incorrect) CHECK_NOTHROW(render_task_template(tpl, all));
    }
}
