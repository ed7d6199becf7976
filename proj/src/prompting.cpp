#include "synthloop/prompting.hpp"

#include <stdexcept>

#include "synthloop/error.hpp"

namespace synthloop {

void PromptConfig::validate() const {
    if (n_requested < 1) throw ValidationError("prompt: n_requested must be >= 1");
    if (task_description.empty()) throw ValidationError("prompt: task_description must be non-empty");
    if (self_evolution_text.empty()) throw ValidationError("prompt: self_evolution_text must be non-empty");
}

std::string_view to_string(PromptSection s) {
    switch (s) {
        case PromptSection::task_description: return "task_description";
        case PromptSection::examples_listing: return "examples_listing";
        case PromptSection::data_explanation: return "data_explanation";
        case PromptSection::output_formatting: return "output_formatting";
    }
    return "";
}

std::string_view section_heading(PromptSection s) {
    switch (s) {
        case PromptSection::task_description: return "### Task";
        case PromptSection::examples_listing: return "### Examples";
        case PromptSection::data_explanation: return "### Data explanation";
        case PromptSection::output_formatting: return "### Output format";
    }
    return "";
}

const std::string& PromptBundle::section_text(PromptSection s) const {
    for (const auto& [name, text] : sections) {
        if (name == s) return text;
    }
    throw std::out_of_range("prompt bundle has no section " + std::string(to_string(s)));
}

std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

PromptBundle build_generation_prompt(const PromptConfig& cfg, const FeatureSchema& schema, const Dataset& examples,
                                     const std::string& target_attack) {
    cfg.validate();
    if (!schema.has_attack(target_attack)) throw ValidationError("unknown attack \"" + target_attack + "\"");
    if (!(examples.schema() == schema)) throw ValidationError("examples use a different schema");
    const Dataset listed = examples.binary_task(target_attack);
    if (listed.benign_count() == 0) throw ValidationError("examples contain no benign record");
    if (listed.count(target_attack) == 0) throw ValidationError("examples contain no \"" + target_attack + "\" record");

    PromptBundle b;
    b.target_attack = target_attack;
    b.n_requested = cfg.n_requested;
    b.examples = listed.records();

    std::string task = cfg.task_description;
    task += "\nThe model has to tell benign traffic apart from \"" + target_attack + "\" DDoS attack traffic.";

    std::string listing = "These " + std::to_string(listed.size()) +
                          " labeled records were collected from real traffic (CSV, header first):\n";
    listing += schema.csv_header_line();
    for (const auto& r : listed.records()) {
        listing += '\n';
        listing += format_row(r);
    }

    std::string explanation = "Each record describes one traffic flow with the following values:";
    for (const auto& f : schema.features()) {
        explanation += "\n- " + f.name + " (" + std::string(to_string(f.kind)) + ", from " + format_number(f.min) +
                       " to " + format_number(f.max) + "): " + f.description;
    }
    explanation += "\n- label: \"benign\" for normal traffic, \"" + target_attack + "\" for attack traffic.";
    for (const auto& f : schema.features()) {
        if (count_occurrences(explanation, f.name) != 1) {
            throw ValidationError("feature name \"" + f.name +
                                  "\" must appear exactly once in the data explanation; check the descriptions");
        }
    }

    const std::string n = std::to_string(cfg.n_requested);
    std::string format = "Generate exactly " + n + " new records labeled benign and exactly " + n +
                         " new records labeled " + target_attack + ". Start with this CSV header:\n" +
                         schema.csv_header_line();
    if (!cfg.output_format_instructions.empty()) format += "\n" + cfg.output_format_instructions;

    b.sections = {{PromptSection::task_description, std::move(task)},
                  {PromptSection::examples_listing, std::move(listing)},
                  {PromptSection::data_explanation, std::move(explanation)},
                  {PromptSection::output_formatting, std::move(format)}};
    for (const auto& [section, text] : b.sections) {
        if (!b.rendered.empty()) b.rendered += "\n\n";
        b.rendered += section_heading(section);
        b.rendered += '\n';
        b.rendered += text;
    }
    return b;
}

ConversationTurn build_self_evolution_turn(std::optional<std::string> override_text) {
    if (override_text && override_text->empty()) throw ValidationError("self-evolution text must be non-empty");
    return {Role::user, override_text ? std::move(*override_text) : std::string(kSelfEvolutionText)};
}

std::vector<ConversationTurn> assemble_conversation(
    const PromptBundle& bundle, const std::vector<std::pair<ConversationTurn, ConversationTurn>>& prior_rounds) {
    if (bundle.rendered.empty()) throw ValidationError("prompt bundle is empty");
    std::vector<ConversationTurn> turns;
    turns.reserve(1 + 2 * prior_rounds.size());
    turns.push_back({Role::user, bundle.rendered});
    for (std::size_t i = 0; i < prior_rounds.size(); ++i) {
        const auto& [reply, follow_up] = prior_rounds[i];
        if (reply.role != Role::assistant || follow_up.role != Role::user) {
            throw ValidationError("prior round " + std::to_string(i) + " must be an (assistant, user) pair");
        }
        if (reply.text.empty() || follow_up.text.empty()) {
            throw ValidationError("prior round " + std::to_string(i) + " has an empty turn");
        }
        turns.push_back(reply);
        turns.push_back(follow_up);
    }
    return turns;
}

}  // namespace synthloop
