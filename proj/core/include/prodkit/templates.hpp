#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prodkit {

enum class TaskKind { CG, CC, AI, AC, CMC };

std::string_view to_string(TaskKind k);
TaskKind task_kind_from(std::string_view s);

using SlotMap = std::map<std::string, std::string>;

/// A prompt sent to an expert endpoint: plain `{slot}` substitution, no
/// value escaping. The shipped defaults cover question generation, the
/// answer-equivalence check, the answerer context line, and the five
/// per-task evaluation prompts.
struct PromptTemplate {
    std::string template_id;
    std::string role;  // "querier", "judge", "answerer", "eval:CG", ...
    std::string text;
};

/// Substitutes every `{slot}` in the template. Throws ConfigError when a
/// referenced slot is missing from `slots`.
std::string render_prompt(const PromptTemplate& tpl, const SlotMap& slots);

namespace prompts {
const PromptTemplate& question_gen();
const PromptTemplate& answer_check();
const PromptTemplate& answerer_context();
const PromptTemplate& eval_prompt(TaskKind task);
/// Deterministic fallback when the querier keeps leaking the value:
/// "What is the <name> of the product?" with the name case-folded.
std::string fallback_question(std::string_view attr_name);
}  // namespace prompts

/// One conversation-side template. `{slot}` substitutes verbatim; the form
/// `<{slot}>` marks an extractable slot: the value is escaped and wrapped in
/// literal angle brackets so extract_bracketed can recover it.
struct TaskTemplate {
    std::string id;
    std::string text;
};

struct RenderedText {
    std::string text;
    std::vector<std::string> extracted;  // extractable values, in order
};

/// Renders a task template. Values injected at extractable positions have
/// literal '\', '<', '>' escaped as "\\", "\<", "\>". Throws ConfigError on
/// a missing slot.
RenderedText render_task_template(const TaskTemplate& tpl, const SlotMap& slots);

struct Conversation {
    std::string user_text;
    std::string assistant_text;
    std::vector<std::string> gold_values;  // assistant-side extractables
};

Conversation render_conversation(const TaskTemplate& instruction, const TaskTemplate& response,
                                 const SlotMap& slots);

/// Contents of each balanced, unescaped `<...>` pair, left to right, with
/// escapes undone. A new unescaped '<' restarts the pending capture, so the
/// innermost pair wins; unmatched brackets yield nothing.
std::vector<std::string> extract_bracketed(std::string_view text);

/// Escapes a value for inline inclusion inside a hand-assembled bracketed
/// block (e.g. pre-formatted option lists).
std::string escape_bracket_value(std::string_view value);

/// Per-task instruction and response templates. AC keeps separate response
/// families for the correct and incorrect branches.
struct TaskTemplates {
    std::vector<TaskTemplate> instructions;
    std::vector<TaskTemplate> responses;
    std::vector<TaskTemplate> responses_incorrect;  // AC only
};

class TemplateBank {
public:
    /// The built-in bank: exemplar phrasings plus paraphrase variants,
    /// roughly 15 instructions and 10 responses per task.
    static const TemplateBank& defaults();

    static TemplateBank from_json(const nlohmann::json& doc);
    static TemplateBank load_file(const std::string& path);
    nlohmann::json to_json() const;

    const TaskTemplates& for_task(TaskKind k) const;
    TaskTemplates& for_task(TaskKind k);

    /// Checks every template against its task's slot vocabulary and the AC
    /// yes/no response contract. Throws ConfigError on violations.
    void validate() const;

private:
    TaskTemplates cg_, cc_, ai_, ac_, cmc_;
};

}  // namespace prodkit
