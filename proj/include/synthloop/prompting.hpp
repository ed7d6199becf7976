#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthloop/dataset.hpp"

namespace synthloop {

inline constexpr std::string_view kDefaultTaskDescription =
    "I am generating some data to train an ML model for network intrusion detection. "
    "Please synthesize new labeled network traffic records that are realistic and "
    "consistent with the examples below.";

inline constexpr std::string_view kDefaultOutputInstructions =
    "Write one record per line as a CSV row, values in header order and the label in the last column. "
    "Do not number the rows and do not add comments between them.";

inline constexpr std::string_view kSelfEvolutionText =
    "These examples are not accurate enough to train ML models. Can you generate better data";

struct PromptConfig {
    std::string task_description{kDefaultTaskDescription};
    int n_requested = 10;  // records requested per class
    std::string output_format_instructions{kDefaultOutputInstructions};
    std::string self_evolution_text{kSelfEvolutionText};

    void validate() const;
};

enum class PromptSection { task_description, examples_listing, data_explanation, output_formatting };

std::string_view to_string(PromptSection s);
// Heading used in the rendered prompt, e.g. "### Examples".
std::string_view section_heading(PromptSection s);

/// The four prompt sections, in fixed order, plus their rendering.
struct PromptBundle {
    std::vector<std::pair<PromptSection, std::string>> sections;
    std::string rendered;
    std::string target_attack;
    int n_requested = 0;
    // The example records listed in the prompt, in listing order.
    std::vector<TrafficRecord> examples;

    const std::string& section_text(PromptSection s) const;
};

enum class Role { system, user, assistant };
std::string_view to_string(Role r);

struct ConversationTurn {
    Role role = Role::user;
    std::string text;

    bool operator==(const ConversationTurn&) const = default;
};

// Throws ValidationError when `examples` lacks a benign or a target-attack
// record, or when the attack is not in the schema.
PromptBundle build_generation_prompt(const PromptConfig& cfg, const FeatureSchema& schema, const Dataset& examples,
                                     const std::string& target_attack);

ConversationTurn build_self_evolution_turn(std::optional<std::string> override_text = std::nullopt);

// [user: rendered bundle, assistant, user, assistant, user, ...]. Each prior
// round is an (assistant reply, self-evolution user turn) pair.
std::vector<ConversationTurn> assemble_conversation(
    const PromptBundle& bundle, const std::vector<std::pair<ConversationTurn, ConversationTurn>>& prior_rounds);

}  // namespace synthloop
