#include <gtest/gtest.h>

#include <string>

#include "synthloop/corpus.hpp"
#include "synthloop/error.hpp"
#include "synthloop/generation.hpp"
#include "synthloop/prompting.hpp"

using namespace synthloop;

namespace {

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

PromptBundle desk_bundle(const PromptConfig& cfg = {}) {
    auto d = make_desk_corpus();
    return build_generation_prompt(cfg, d.train.schema(), d.train, "tcp_ack_flood");
}

}  // namespace

TEST(Prompt, FourSectionsInOrder) {
    auto b = desk_bundle();
    ASSERT_EQ(b.sections.size(), 4u);
    EXPECT_EQ(b.sections[0].first, PromptSection::task_description);
    EXPECT_EQ(b.sections[1].first, PromptSection::examples_listing);
    EXPECT_EQ(b.sections[2].first, PromptSection::data_explanation);
    EXPECT_EQ(b.sections[3].first, PromptSection::output_formatting);
    std::size_t last = 0;
    for (const auto& [section, text] : b.sections) {
        EXPECT_FALSE(text.empty());
        const auto at = b.rendered.find(std::string(section_heading(section)));
        ASSERT_NE(at, std::string::npos);
        EXPECT_GE(at, last);
        last = at;
        EXPECT_NE(b.rendered.find(text), std::string::npos);
    }
}

TEST(Prompt, TaskPhrase) {
    auto b = desk_bundle();
    EXPECT_NE(b.section_text(PromptSection::task_description).find("network intrusion detection"), std::string::npos);
    EXPECT_NE(b.rendered.find("generating some data to train an ML model"), std::string::npos);
}

TEST(Prompt, ExampleRowsAndDescriptions) {
    auto d = make_desk_corpus();
    auto b = build_generation_prompt({}, d.train.schema(), d.train, "tcp_ack_flood");
    std::size_t rows = 0;
    for (const auto& r : d.train.records()) rows += occurrences(b.rendered, format_row(r) + "\n");
    EXPECT_EQ(rows, 20u);
    EXPECT_EQ(b.examples.size(), 20u);
    const auto& expl = b.section_text(PromptSection::data_explanation);
    for (const auto& f : d.train.schema().features()) {
        EXPECT_NE(b.rendered.find(f.description), std::string::npos) << f.name;
        EXPECT_EQ(occurrences(expl, f.name), 1u) << f.name;
    }
}

TEST(Prompt, OutputSectionStatesCountsAndHeader) {
    PromptConfig cfg;
    cfg.n_requested = 40;
    auto b = desk_bundle(cfg);
    const auto& out = b.section_text(PromptSection::output_formatting);
    EXPECT_NE(out.find("exactly 40 new records labeled benign"), std::string::npos);
    EXPECT_NE(out.find("exactly 40 new records labeled tcp_ack_flood"), std::string::npos);
    EXPECT_NE(out.find(desk_schema().csv_header_line()), std::string::npos);
    EXPECT_EQ(b.n_requested, 40);
}

TEST(Prompt, MissingClassOrUnknownAttack) {
    auto d = make_desk_corpus().train;
    auto benign_only = d.binary_task("tcp_fin_flood");
    EXPECT_EQ(benign_only.attack_count(), 0u);
    EXPECT_THROW(build_generation_prompt({}, d.schema(), benign_only, "tcp_ack_flood"), ValidationError);
    EXPECT_THROW(build_generation_prompt({}, d.schema(), d, "tcp_rst_flood"), ValidationError);
    EXPECT_THROW(build_generation_prompt({}, d.schema(), d, "tcp_fin_flood"), ValidationError);
    PromptConfig bad;
    bad.n_requested = 0;
    EXPECT_THROW(build_generation_prompt(bad, d.schema(), d, "tcp_ack_flood"), ValidationError);
    bad = {};
    bad.task_description.clear();
    EXPECT_THROW(build_generation_prompt(bad, d.schema(), d, "tcp_ack_flood"), ValidationError);
}

TEST(Prompt, Deterministic) {
    EXPECT_EQ(desk_bundle().rendered, desk_bundle().rendered);
}

TEST(Prompt, ConfigNeverReordersSections) {
    PromptConfig cfg;
    cfg.task_description = "### Output format\nfirst";
    cfg.output_format_instructions = "last";
    auto b = desk_bundle(cfg);
    EXPECT_EQ(b.sections.front().first, PromptSection::task_description);
    EXPECT_EQ(b.sections.back().first, PromptSection::output_formatting);
    EXPECT_TRUE(b.rendered.ends_with("last") || b.rendered.ends_with("last\n"));
}

TEST(Prompt, ExamplesParseBack) {
    auto d = make_desk_corpus();
    auto b = build_generation_prompt({}, d.train.schema(), d.train, "tcp_ack_flood");
    auto parsed = parse_synthetic_output(b.section_text(PromptSection::examples_listing), d.train.schema(), 1);
    ASSERT_EQ(parsed.records.size(), d.train.size());
    for (std::size_t i = 0; i < parsed.records.size(); ++i) {
        EXPECT_EQ(parsed.records[i].values, d.train.records()[i].values);
        EXPECT_EQ(parsed.records[i].label, d.train.records()[i].label);
    }
}

TEST(SelfEvolution, DefaultTurn) {
    auto t = build_self_evolution_turn();
    EXPECT_EQ(t.role, Role::user);
    EXPECT_EQ(t.text, "These examples are not accurate enough to train ML models. Can you generate better data");
}

TEST(SelfEvolution, Override) {
    auto t = build_self_evolution_turn("Improve diversity.");
    EXPECT_EQ(t.role, Role::user);
    EXPECT_EQ(t.text, "Improve diversity.");
}

TEST(Conversation, Lengths) {
    auto b = desk_bundle();
    auto one = assemble_conversation(b, {});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].role, Role::user);
    EXPECT_EQ(one[0].text, b.rendered);

    const ConversationTurn reply{Role::assistant, "some rows"};
    auto three = assemble_conversation(b, {{reply, build_self_evolution_turn()}});
    ASSERT_EQ(three.size(), 3u);
    EXPECT_EQ(three[0].role, Role::user);
    EXPECT_EQ(three[1].role, Role::assistant);
    EXPECT_EQ(three[2].role, Role::user);

    auto five = assemble_conversation(b, {{reply, build_self_evolution_turn()}, {reply, build_self_evolution_turn()}});
    ASSERT_EQ(five.size(), 5u);
    EXPECT_EQ(five.back(), build_self_evolution_turn());
}

TEST(Conversation, MalformedAlternation) {
    auto b = desk_bundle();
    const ConversationTurn user{Role::user, "x"}, assistant{Role::assistant, "y"};
    EXPECT_THROW(assemble_conversation(b, {{user, user}}), ValidationError);
    EXPECT_THROW(assemble_conversation(b, {{assistant, assistant}}), ValidationError);
    EXPECT_THROW(assemble_conversation(b, {{ConversationTurn{Role::assistant, ""}, user}}), ValidationError);
}
