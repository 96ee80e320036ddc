#include <doctest.h>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/fact_mining.hpp"
#include "faithfulrag/util.hpp"
#include "support.hpp"

using namespace faithfulrag;

TEST_CASE("list parser handles numbered lines") {
    auto items = parse_list_items("1. A\n2. B");
    REQUIRE(items.size() == 2);
    CHECK(items[0].body == "A");
    CHECK(items[1].body == "B");
}

TEST_CASE("list parser handles markers without spaces and parens") {
    auto items = parse_list_items("1.First fact.\n2)Second fact.");
    REQUIRE(items.size() == 2);
    CHECK(items[0].body == "First fact.");
    CHECK(items[1].body == "Second fact.");
}

TEST_CASE("list parser preserves bulleted order") {
    auto items = parse_list_items("- x\n* y\n• z");
    REQUIRE(items.size() == 3);
    CHECK(items[0].body == "x");
    CHECK(items[1].body == "y");
    CHECK(items[2].body == "z");
}

TEST_CASE("unmarked lines continue the previous item") {
    auto items = parse_list_items("1. start of item\ncontinuation line\n2. next");
    REQUIRE(items.size() == 2);
    CHECK(items[0].body == "start of item continuation line");
}

TEST_CASE("title-colon lines parse into titled claims") {
    auto items = parse_list_items("Gravity: pulls things down\nInertia: resists change");
    REQUIRE(items.size() == 2);
    CHECK(items[0].title == "Gravity");
    CHECK(items[0].body == "pulls things down");
    CHECK(items[1].title == "Inertia");
}

TEST_CASE("sentence-split fallback fires when no markers exist") {
    auto items = parse_list_items("The sky is blue. Water is wet. Rocks are hard.");
    REQUIRE(items.size() == 3);
    CHECK(items[0].body == "The sky is blue.");
    CHECK(items[2].body == "Rocks are hard.");
}

TEST_CASE("parser totality: blank completions raise ParseFailure") {
    CHECK_THROWS_AS(parse_list_items("   \n  \n"), ParseFailure);
}

namespace {

Gateway scripted_gateway() {
    return Gateway(BackendConfig::scripted({
        {"Knowledge needed:", "Angular momentum: spins stay constant\nImpacts: transfer energy"},
        {"Knowledge points:",
         "Angular momentum is conserved in closed systems. Impacts add momentum."},
        {"declarative sentence per line",
         "1. Angular momentum is conserved.\n1. Angular momentum is conserved.\n2. Impacts add "
         "momentum."},
    }));
}

} // namespace

TEST_CASE("extract_self_knowledge parses claims and records the stage") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    std::vector<StageRecord> records;
    SelfKnowledge knowledge = miner.extract_self_knowledge("why spin faster?", {}, &records);
    REQUIRE(knowledge.claims.size() == 2);
    CHECK(knowledge.claims[0].title == "Angular momentum");
    CHECK(knowledge.claims[0].body == "spins stay constant");
    REQUIRE(records.size() == 1);
    CHECK(records[0].stage == "self_knowledge");
    CHECK_FALSE(records[0].completion.empty());
}

TEST_CASE("self-context prompt embeds every claim verbatim") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    std::vector<StageRecord> records;
    SelfKnowledge knowledge = miner.extract_self_knowledge("why spin faster?", {}, &records);
    miner.generate_self_context("why spin faster?", {}, knowledge, &records);
    REQUIRE(records.size() == 2);
    std::string prompt_text = records[1].prompt.dump();
    for (const auto& claim : knowledge.claims)
        CHECK(util::contains(records[1].prompt[1]["content"].get<std::string>(), claim.body));
}

TEST_CASE("self-context generation requires claims") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    CHECK_THROWS_AS(miner.generate_self_context("q", {}, SelfKnowledge{}), ValidationError);
}

TEST_CASE("fact extraction dedupes case-insensitively in first-seen order") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    SelfFactSet facts = miner.extract_self_facts(SelfContext{"some source passage"});
    REQUIRE(facts.facts.size() == 2);
    CHECK(facts.facts[0] == "Angular momentum is conserved.");
    CHECK(facts.facts[1] == "Impacts add momentum.");
    CHECK(facts.source == "some source passage");
}

TEST_CASE("facts are clipped to 400 characters and capped by max_items") {
    std::string oversized(600, 'x');
    Gateway gateway(BackendConfig::scripted(
        {{"declarative sentence per line", "1. " + oversized + "\n2. b\n3. c\n4. d"}}));
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m", 3);
    SelfFactSet facts = miner.extract_self_facts(SelfContext{"passage"});
    CHECK(facts.facts.size() == 3);
    CHECK(facts.facts[0].size() == 400);
}

TEST_CASE("mine composes the three stages in order") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    std::vector<StageRecord> records;
    SelfKnowledge knowledge;
    SelfContext context;
    SelfFactSet facts = miner.mine("why spin faster?", {}, &records, &knowledge, &context);
    REQUIRE(records.size() == 3);
    CHECK(records[0].stage == "self_knowledge");
    CHECK(records[1].stage == "self_context");
    CHECK(records[2].stage == "self_fact");
    CHECK(facts.facts.size() == 2);
    // Each stage's prompt embeds the previous stage's output.
    CHECK(util::contains(records[1].prompt[1]["content"].get<std::string>(),
                         knowledge.claims[0].body));
    CHECK(util::contains(records[2].prompt[1]["content"].get<std::string>(), context.text));
}

TEST_CASE("mine tags stage failures with the stage name") {
    // Script covers stage 1 but not stage 2: the miss must be tagged self_context.
    Gateway gateway(BackendConfig::scripted(
        {{"Knowledge needed:", "Topic: claim body"}}));
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    try {
        miner.mine("q?", {});
        FAIL("expected ItemFailure");
    } catch (const ItemFailure& e) {
        CHECK(e.stage == "self_context");
        CHECK(util::contains(e.what(), "self_context"));
    }
}

TEST_CASE("scripted mining is a pure function of question and script") {
    Gateway gateway = scripted_gateway();
    TemplateStore store = TemplateStore::builtin();
    FactMiner miner(gateway, store, "m");
    SelfFactSet a = miner.mine("why spin faster?", {});
    SelfFactSet b = miner.mine("why spin faster?", {});
    CHECK(a.facts == b.facts);
    CHECK(a.source == b.source);
}
