#include "prodkit/templates.hpp"

#include "prodkit/errors.hpp"
#include "prodkit/jsonl.hpp"
#include "prodkit/text.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <set>

namespace prodkit {

namespace {

bool is_slot_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string escape_value(std::string_view v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v) {
        if (c == '\\' || c == '<' || c == '>') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string unescape_value(std::string_view v) {
    std::string out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size() &&
            (v[i + 1] == '\\' || v[i + 1] == '<' || v[i + 1] == '>')) {
            out.push_back(v[i + 1]);
            ++i;
        } else {
            out.push_back(v[i]);
        }
    }
    return out;
}

const std::string& lookup(const SlotMap& slots, const std::string& name, std::string_view tpl_id) {
    auto it = slots.find(name);
    if (it == slots.end()) {
        throw ConfigError("template '" + std::string(tpl_id) + "' references missing slot '" + name + "'");
    }
    return it->second;
}

// Shared scanner for `{slot}` and `<{slot}>` forms. When `escape` is set,
// extractable values get their angle brackets and backslashes escaped.
RenderedText render_text(std::string_view text, std::string_view tpl_id, const SlotMap& slots, bool escape) {
    RenderedText out;
    out.text.reserve(text.size());
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto read_slot = [&](std::size_t open) -> std::pair<std::string, std::size_t> {
        std::size_t j = open + 1;
        while (j < n && is_slot_char(text[j])) ++j;
        if (j >= n || text[j] != '}' || j == open + 1) {
            throw ConfigError("template '" + std::string(tpl_id) + "' has an unterminated or empty slot");
        }
        return {std::string(text.substr(open + 1, j - open - 1)), j};
    };

    while (i < n) {
        char c = text[i];
        if (c == '<' && i + 1 < n && text[i + 1] == '{') {
            auto [name, close] = read_slot(i + 1);
            if (close + 1 < n && text[close + 1] == '>') {
                const std::string& value = lookup(slots, name, tpl_id);
                out.text.push_back('<');
                out.text += escape ? escape_value(value) : value;
                out.text.push_back('>');
                out.extracted.push_back(value);
                i = close + 2;
                continue;
            }
        }
        if (c == '{') {
            auto [name, close] = read_slot(i);
            out.text += lookup(slots, name, tpl_id);
            i = close + 1;
            continue;
        }
        out.text.push_back(c);
        ++i;
    }
    return out;
}

std::vector<std::string> referenced_slots(std::string_view text, std::string_view tpl_id) {
    // Render against a slot map that records lookups.
    std::vector<std::string> refs;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < n && is_slot_char(text[j])) ++j;
            if (j >= n || text[j] != '}' || j == i + 1) {
                throw ConfigError("template '" + std::string(tpl_id) + "' has an unterminated or empty slot");
            }
            refs.emplace_back(text.substr(i + 1, j - i - 1));
            i = j + 1;
        } else {
            ++i;
        }
    }
    return refs;
}

std::vector<std::string> extractable_slots(std::string_view text) {
    std::vector<std::string> refs;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i + 1 < n) {
        if (text[i] == '<' && text[i + 1] == '{') {
            std::size_t j = i + 2;
            while (j < n && is_slot_char(text[j])) ++j;
            if (j + 1 < n && text[j] == '}' && text[j + 1] == '>') {
                refs.emplace_back(text.substr(i + 2, j - i - 2));
                i = j + 2;
                continue;
            }
        }
        ++i;
    }
    return refs;
}

std::string first_alpha_token(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && !std::isalpha(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = b;
    while (e < s.size() && std::isalpha(static_cast<unsigned char>(s[e]))) ++e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::CG: return "CG";
        case TaskKind::CC: return "CC";
        case TaskKind::AI: return "AI";
        case TaskKind::AC: return "AC";
        case TaskKind::CMC: return "CMC";
    }
    return "?";
}

TaskKind task_kind_from(std::string_view s) {
    if (s == "CG") return TaskKind::CG;
    if (s == "CC") return TaskKind::CC;
    if (s == "AI") return TaskKind::AI;
    if (s == "AC") return TaskKind::AC;
    if (s == "CMC") return TaskKind::CMC;
    throw ConfigError("unknown task kind: " + std::string(s));
}

std::string render_prompt(const PromptTemplate& tpl, const SlotMap& slots) {
    return render_text(tpl.text, tpl.template_id, slots, /*escape=*/false).text;
}

namespace prompts {

const PromptTemplate& question_gen() {
    static const PromptTemplate tpl{
        "querier-default/1", "querier",
        "Given the title of a product and a pair of attribute name and value of the product, "
        "generate a possible question about the attribute name from which the attribute value "
        "can be inferred. The question generated should not contain the attribute value and use "
        "a brief name(e.g. just a noun) to refer the product itself.\n\n"
        "Example:\n\n"
        "Product name: 4MP 1080P IP Outdoor WiFi Security Camera for Home Surveillance, "
        "Waterproof Bullet Cam, HD WiFi Video. Attribute name: Supported Mobile Systems. "
        "Attribute value: Android. Question: What is the supported mobile systems of the camera?\n\n"
        "Product name: <{caption}>. Attribute name: <{attr_name}>. Attribute value: <{attr_value}>. "
        "Question:"};
    return tpl;
}

const PromptTemplate& answer_check() {
    static const PromptTemplate tpl{
        "judge-default/1", "judge",
        "Given a certain attribute of a product, you're required to judge whether a candidate "
        "attribute value is completely equivalent to the reference attribute value without any "
        "ambiguity (consistent keywords and the same number of keywords). Simply respond with "
        "\"yes\" (indicating the two values are equivalent) or \"no\" (indicating they're not).\n\n"
        "Attribute name: <{attr_name}>. Reference attribute value: <{reference}>. "
        "Candidate attribute value: <{candidate}>.\n\n"
        "Judgement:"};
    return tpl;
}

const PromptTemplate& answerer_context() {
    static const PromptTemplate tpl{
        "answerer-default/1", "answerer",
        "The caption of the product in the image is {context}. {question}"};
    return tpl;
}

const PromptTemplate& eval_prompt(TaskKind task) {
    static const std::array<PromptTemplate, 5> tpls{{
        {"eval-cg/1", "eval:CG",
         "Generate a caption that encapsulates the essence of the product in the image."},
        {"eval-cc/1", "eval:CC",
         "Enhance this existing title to make it more appealing for the product shown in the "
         "image with these features given: [{features}]. The initial caption is: <{base_caption}>. "
         "Just answer the enhanced caption based on the initial caption with necessary attributes."},
        {"eval-ai/1", "eval:AI",
         "The caption of the product in the image is {caption}. Please clarify the attribute "
         "{attr_name} of the product. Just respond with a simple phrase and respond unknown if "
         "you're not sure."},
        {"eval-ac/1", "eval:AC",
         "Upon reviewing the product titled <{caption}> in the attached image, is the "
         "<{attr_name}> attribute correctly <{shown_value}>? Just respond yes or no. If this is "
         "incorrect, kindly provide the accurate value."},
        {"eval-cmc/1", "eval:CMC",
         "The caption of the product in the image is {caption}. Choose the most fitting category "
         "for the product: [{options}]. Just answer the option number that you believe correct."},
    }};
    return tpls[static_cast<std::size_t>(task)];
}

std::string fallback_question(std::string_view attr_name) {
    return "What is the " + text::fold(attr_name) + " of the product?";
}

}  // namespace prompts

RenderedText render_task_template(const TaskTemplate& tpl, const SlotMap& slots) {
    return render_text(tpl.text, tpl.id, slots, /*escape=*/true);
}

Conversation render_conversation(const TaskTemplate& instruction, const TaskTemplate& response,
                                 const SlotMap& slots) {
    Conversation conv;
    conv.user_text = render_task_template(instruction, slots).text;
    RenderedText assistant = render_task_template(response, slots);
    conv.assistant_text = std::move(assistant.text);
    conv.gold_values = std::move(assistant.extracted);
    return conv;
}

std::vector<std::string> extract_bracketed(std::string_view s) {
    std::vector<std::string> values;
    constexpr std::size_t npos = std::string_view::npos;
    std::size_t start = npos;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\\' && i + 1 < s.size() && (s[i + 1] == '\\' || s[i + 1] == '<' || s[i + 1] == '>')) {
            i += 2;
            continue;
        }
        if (c == '<') {
            start = i + 1;  // a fresh '<' restarts the capture
        } else if (c == '>' && start != npos) {
            values.push_back(unescape_value(s.substr(start, i - start)));
            start = npos;
        }
        ++i;
    }
    return values;
}

std::string escape_bracket_value(std::string_view value) { return escape_value(value); }

const TaskTemplates& TemplateBank::for_task(TaskKind k) const {
    switch (k) {
        case TaskKind::CG: return cg_;
        case TaskKind::CC: return cc_;
        case TaskKind::AI: return ai_;
        case TaskKind::AC: return ac_;
        case TaskKind::CMC: return cmc_;
    }
    throw ConfigError("bad task kind");
}

TaskTemplates& TemplateBank::for_task(TaskKind k) {
    return const_cast<TaskTemplates&>(static_cast<const TemplateBank*>(this)->for_task(k));
}

namespace {

nlohmann::json templates_to_json(const std::vector<TaskTemplate>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : v) arr.push_back({{"id", t.id}, {"text", t.text}});
    return arr;
}

std::vector<TaskTemplate> templates_from_json(const nlohmann::json& arr, std::string_view where) {
    if (!arr.is_array()) throw ConfigError("template bank: " + std::string(where) + " must be an array");
    std::vector<TaskTemplate> out;
    for (const auto& t : arr) {
        if (!t.is_object() || !t.contains("id") || !t.contains("text")) {
            throw ConfigError("template bank: entries need id and text (" + std::string(where) + ")");
        }
        out.push_back({t["id"].get<std::string>(), t["text"].get<std::string>()});
    }
    return out;
}

}  // namespace

nlohmann::json TemplateBank::to_json() const {
    nlohmann::json tasks;
    for (TaskKind k : {TaskKind::CG, TaskKind::CC, TaskKind::AI, TaskKind::AC, TaskKind::CMC}) {
        const auto& t = for_task(k);
        nlohmann::json entry{{"instructions", templates_to_json(t.instructions)}};
        if (k == TaskKind::AC) {
            entry["responses_correct"] = templates_to_json(t.responses);
            entry["responses_incorrect"] = templates_to_json(t.responses_incorrect);
        } else {
            entry["responses"] = templates_to_json(t.responses);
        }
        tasks[std::string(to_string(k))] = std::move(entry);
    }
    return nlohmann::json{{"version", 1}, {"tasks", tasks}};
}

TemplateBank TemplateBank::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("tasks")) {
        throw ConfigError("template bank: missing tasks object");
    }
    TemplateBank bank;
    const auto& tasks = doc["tasks"];
    for (TaskKind k : {TaskKind::CG, TaskKind::CC, TaskKind::AI, TaskKind::AC, TaskKind::CMC}) {
        std::string key(to_string(k));
        if (!tasks.contains(key)) throw ConfigError("template bank: missing task " + key);
        const auto& entry = tasks[key];
        auto& t = bank.for_task(k);
        t.instructions = templates_from_json(entry.value("instructions", nlohmann::json::array()), key + ".instructions");
        if (k == TaskKind::AC) {
            t.responses = templates_from_json(entry.value("responses_correct", nlohmann::json::array()), key + ".responses_correct");
            t.responses_incorrect = templates_from_json(entry.value("responses_incorrect", nlohmann::json::array()), key + ".responses_incorrect");
        } else {
            t.responses = templates_from_json(entry.value("responses", nlohmann::json::array()), key + ".responses");
        }
    }
    bank.validate();
    return bank;
}

TemplateBank TemplateBank::load_file(const std::string& path) {
    return from_json(load_json_file(path));
}

void TemplateBank::validate() const {
    struct SlotRule {
        TaskKind task;
        std::set<std::string> instruction_slots;
        std::set<std::string> response_slots;
        std::set<std::string> incorrect_slots;
    };
    static const std::vector<SlotRule> rules = {
        {TaskKind::CG, {}, {"caption"}, {}},
        {TaskKind::CC, {"features", "base_caption"}, {"caption"}, {}},
        {TaskKind::AI, {"attr_name"}, {"value"}, {}},
        {TaskKind::AC, {"attr_name", "shown_value"}, {"attr_name", "shown_value"}, {"attr_name", "correct_value"}},
        {TaskKind::CMC, {"options"}, {"choice"}, {}},
    };

    auto check = [](const std::vector<TaskTemplate>& tpls, const std::set<std::string>& allowed,
                    std::string_view where) {
        if (tpls.empty()) throw ConfigError("template bank: no templates for " + std::string(where));
        for (const auto& t : tpls) {
            for (const auto& slot : referenced_slots(t.text, t.id)) {
                if (!allowed.count(slot)) {
                    throw ConfigError("template '" + t.id + "' uses slot '" + slot +
                                      "' outside the slot set of " + std::string(where));
                }
            }
        }
    };

    for (const auto& rule : rules) {
        const auto& t = for_task(rule.task);
        std::string name(to_string(rule.task));
        check(t.instructions, rule.instruction_slots, name + ".instructions");
        check(t.responses, rule.response_slots,
              rule.task == TaskKind::AC ? name + ".responses_correct" : name + ".responses");
        if (rule.task == TaskKind::AC) {
            check(t.responses_incorrect, rule.incorrect_slots, name + ".responses_incorrect");
            // The scorer parses AC replies by leading yes/no token and takes
            // the last bracketed value as the proposed correction.
            for (const auto& tpl : t.responses) {
                if (text::fold(first_alpha_token(tpl.text)) != "yes") {
                    throw ConfigError("AC correct-response template '" + tpl.id + "' must lead with Yes");
                }
            }
            for (const auto& tpl : t.responses_incorrect) {
                if (text::fold(first_alpha_token(tpl.text)) != "no") {
                    throw ConfigError("AC incorrect-response template '" + tpl.id + "' must lead with No");
                }
                auto ex = extractable_slots(tpl.text);
                if (ex.empty() || ex.back() != "correct_value") {
                    throw ConfigError("AC incorrect-response template '" + tpl.id +
                                      "' must end its extractables with <{correct_value}>");
                }
            }
        } else if (t.responses_incorrect.size() > 0) {
            throw ConfigError("responses_incorrect only applies to AC");
        }
    }
}

namespace {

std::vector<TaskTemplate> make(std::string_view prefix, std::initializer_list<const char*> texts) {
    std::vector<TaskTemplate> out;
    int i = 0;
    for (const char* t : texts) {
        char num[8];
        std::snprintf(num, sizeof num, "%02d", ++i);
        out.push_back({std::string(prefix) + num, t});
    }
    return out;
}

TemplateBank build_default_bank() {
    TemplateBank bank;

    bank.for_task(TaskKind::CG).instructions = make("cg-i", {
        "What's a suitable caption for this product that would be eye-catching in the image?",
        "Generate a caption that encapsulates key information about the product in the image.",
        "Please write an appealing caption for the product shown in the image.",
        "Looking at this product image, what caption would you give it?",
        "Craft a product title that captures the key selling points visible in the image.",
        "Suggest a catchy listing title for this product.",
        "What caption best describes the product in this picture?",
        "Compose an attractive caption for this item.",
        "Provide a concise, informative caption for the product shown.",
        "Write a listing caption that highlights the product's key features.",
        "How would you title this product for an online store?",
        "Give this product an eye-catching caption.",
        "Draft a caption suitable for publishing this product online.",
        "Describe this product in one catchy listing title.",
        "Come up with a compelling caption for the product in the image.",
    });
    bank.for_task(TaskKind::CG).responses = make("cg-r", {
        "A catchy caption is <{caption}>.",
        "A suitable caption would be <{caption}>.",
        "How about <{caption}>?",
        "I'd suggest <{caption}>.",
        "One appealing option is <{caption}>.",
        "The product could be captioned <{caption}>.",
        "Here's a fitting caption: <{caption}>.",
        "An eye-catching title is <{caption}>.",
        "You could list it as <{caption}>.",
        "A good listing title is <{caption}>.",
    });

    bank.for_task(TaskKind::CC).instructions = make("cc-i", {
        "Please incorporate these characteristics: [{features}], into a revised version of this caption: <{base_caption}>.",
        "Enhance this caption: <{base_caption}> so it includes the following attributes: [{features}].",
        "Rewrite the caption <{base_caption}> to mention these product features: [{features}].",
        "The caption <{base_caption}> is missing some details. Work these attributes in: [{features}].",
        "Complete this product title: <{base_caption}> with the new attributes: [{features}].",
        "Update the caption <{base_caption}> to cover these characteristics: [{features}].",
        "Given the attributes [{features}], extend this caption: <{base_caption}>.",
        "Merge the following attributes: [{features}] into the existing caption <{base_caption}>.",
        "Revise <{base_caption}> so that every keyword from [{features}] appears.",
        "New attributes arrived: [{features}]. Please fold them into the caption <{base_caption}>.",
        "Expand the title <{base_caption}> with these details: [{features}].",
        "Make the caption <{base_caption}> display all of these attributes: [{features}].",
        "Improve this listing title: <{base_caption}> by adding the attributes [{features}].",
        "Blend the characteristics [{features}] into the caption <{base_caption}>.",
        "Take the caption <{base_caption}> and include the keywords from [{features}].",
    });
    bank.for_task(TaskKind::CC).responses = make("cc-r", {
        "Reflecting the product's attributes, a revised caption would be <{caption}>.",
        "The completed caption is <{caption}>.",
        "With those attributes included: <{caption}>.",
        "Here's the enhanced caption: <{caption}>.",
        "An updated caption is <{caption}>.",
        "After adding the keywords, the caption reads <{caption}>.",
        "The revised title is <{caption}>.",
        "Incorporating everything: <{caption}>.",
        "A caption covering all attributes is <{caption}>.",
        "The extended caption becomes <{caption}>.",
    });

    bank.for_task(TaskKind::AI).instructions = make("ai-i", {
        "Looking at the image along with the caption, what can you tell us about the product's attribute <{attr_name}>? If it's indistinct, please reply with 'Unknown'.",
        "Based on the image and caption, what is the value of the attribute <{attr_name}>? Reply 'Unknown' if it cannot be determined.",
        "Please infer the product's <{attr_name}> from the image and caption. If unclear, answer 'Unknown'.",
        "What would you say the <{attr_name}> of this product is? Say 'Unknown' when it's not inferable.",
        "Can you determine the attribute <{attr_name}> for this product? Respond with 'Unknown' if not.",
        "From the available information, give the value of <{attr_name}>. Use 'Unknown' when indistinct.",
        "Identify the product's <{attr_name}>. If the image and caption don't reveal it, reply 'Unknown'.",
        "Tell me the <{attr_name}> of the product shown. Answer 'Unknown' if you cannot tell.",
        "What is this product's <{attr_name}>? If it is ambiguous, just reply 'Unknown'.",
        "Judging by the picture and title, what's the <{attr_name}>? Reply 'Unknown' when unsure.",
        "Provide the value for the attribute <{attr_name}>, or 'Unknown' if it can't be inferred.",
        "Could you state the product's <{attr_name}>? When indeterminate, respond 'Unknown'.",
        "Infer the attribute <{attr_name}> for the item in the image. Reply 'Unknown' if indistinct.",
        "Given the listing, what is the <{attr_name}>? Answer 'Unknown' if the information is missing.",
        "Look at the product and report its <{attr_name}>. Use 'Unknown' when it is not discernible.",
    });
    bank.for_task(TaskKind::AI).responses = make("ai-r", {
        "The attribute value might be <{value}>.",
        "It appears to be <{value}>.",
        "I'd say the value is <{value}>.",
        "The value should be <{value}>.",
        "Most likely <{value}>.",
        "Based on the listing, it's <{value}>.",
        "That attribute looks like <{value}>.",
        "The product's value for this attribute is <{value}>.",
        "From what I can tell, it is <{value}>.",
        "My answer is <{value}>.",
    });

    bank.for_task(TaskKind::AC).instructions = make("ac-i", {
        "Does the attribute <{attr_name}> correctly bear the value <{shown_value}>? In case of an inaccuracy, please advise on the accurate value.",
        "Is <{shown_value}> the right value for the attribute <{attr_name}>? If not, provide the correct one.",
        "The seller lists <{attr_name}> as <{shown_value}>. Is that accurate? Correct it if necessary.",
        "Please verify: is the product's <{attr_name}> really <{shown_value}>? Supply the accurate value when wrong.",
        "Check whether <{shown_value}> is correct for <{attr_name}>. If it's inaccurate, state the right value.",
        "For attribute <{attr_name}>, the value <{shown_value}> was provided. Confirm or correct it.",
        "Does <{attr_name}> equal <{shown_value}> for this product? Give the proper value otherwise.",
        "Review the attribute <{attr_name}> with value <{shown_value}>. Is it right? If not, what should it be?",
        "Is the stated <{attr_name}> of <{shown_value}> consistent with the product? Advise the accurate value if not.",
        "Validate the pair <{attr_name}>: <{shown_value}>. When incorrect, reply with the true value.",
        "The listing claims the <{attr_name}> is <{shown_value}>. True? Correct any error.",
        "Can you confirm the attribute <{attr_name}> holds the value <{shown_value}>? Fix it when wrong.",
        "Inspect the product: is <{shown_value}> a correct <{attr_name}>? Provide the right value if needed.",
        "Given the image and caption, does <{attr_name}> show the value <{shown_value}>? If inaccurate, correct it.",
        "Assess whether the value <{shown_value}> for <{attr_name}> matches the product, and correct it if not.",
    });
    bank.for_task(TaskKind::AC).responses = make("ac-y", {
        "Yes, the <{attr_name}> attribute correctly bears the value <{shown_value}>.",
        "Yes, <{shown_value}> is accurate for <{attr_name}>.",
        "Yes, the value <{shown_value}> is accurate.",
        "Yes, the product's <{attr_name}> is indeed <{shown_value}>.",
        "Yes, that's the correct value.",
        "Yes, it checks out: <{attr_name}> is <{shown_value}>.",
        "Yes, the provided value is consistent with the product.",
        "Yes, <{attr_name}> correctly reads <{shown_value}>.",
        "Yes, no correction needed.",
        "Yes, the attribute is accurate as given.",
    });
    bank.for_task(TaskKind::AC).responses_incorrect = make("ac-n", {
        "No, the product's <{attr_name}> attribute is <{correct_value}>.",
        "No, the accurate value is <{correct_value}>.",
        "No, it should be <{correct_value}>.",
        "No, that's wrong. The <{attr_name}> is actually <{correct_value}>.",
        "No, the correct <{attr_name}> would be <{correct_value}>.",
        "No, the listing is inaccurate; the value is <{correct_value}>.",
        "No, this attribute actually bears the value <{correct_value}>.",
        "No, please correct it to <{correct_value}>.",
        "No, the right value for <{attr_name}> is <{correct_value}>.",
        "No, the value doesn't match; it ought to be <{correct_value}>.",
    });

    bank.for_task(TaskKind::CMC).instructions = make("cmc-i", {
        "From the selection below, pick the number corresponding to the category you deem most suitable for the product: {options}.",
        "Which category fits this product best? Choose the number: {options}.",
        "Select the most appropriate category for the product from: {options}.",
        "Pick the best matching category. Options: {options}.",
        "Given these categories: {options}, which number matches the product?",
        "Choose the product's category from the following list: {options}.",
        "Among {options}, which category suits the item in the image?",
        "Classify this product. The candidate categories are: {options}.",
        "What category does this product belong to? Choose from: {options}.",
        "Here are the possible categories: {options}. Which one fits?",
        "Please assign the product to one of: {options}.",
        "Based on the image and caption, select the right category: {options}.",
        "Identify the correct category number for this product: {options}.",
        "The product belongs to one of these categories: {options}. Which?",
        "Out of the listed categories, {options}, pick the most fitting number.",
    });
    bank.for_task(TaskKind::CMC).responses = make("cmc-r", {
        "It best fits into category <{choice}>.",
        "The most suitable category is <{choice}>.",
        "I'd classify it as <{choice}>.",
        "Category <{choice}> fits best.",
        "That would be <{choice}>.",
        "The product belongs to <{choice}>.",
        "My pick is <{choice}>.",
        "It should go under <{choice}>.",
        "The right choice is <{choice}>.",
        "Best match: <{choice}>.",
    });

    bank.validate();
    return bank;
}

}  // namespace

const TemplateBank& TemplateBank::defaults() {
    static const TemplateBank bank = build_default_bank();
    return bank;
}

}  // namespace prodkit
