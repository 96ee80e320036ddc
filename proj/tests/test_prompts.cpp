#include <doctest.h>

#include "faithfulrag/errors.hpp"
#include "faithfulrag/prompts.hpp"
#include "support.hpp"

using namespace faithfulrag;

TEST_CASE("placeholder rendering substitutes bindings") {
    CHECK(render_placeholders("Q: {question} K: {knowledge}",
                              {{"question", "why"}, {"knowledge", "because"}}) ==
          "Q: why K: because");
}

TEST_CASE("missing bindings raise RenderError naming the placeholder") {
    try {
        render_placeholders("{question}", {});
        FAIL("expected RenderError");
    } catch (const RenderError& e) {
        CHECK(std::string(e.what()).find("{question}") != std::string::npos);
    }
}

TEST_CASE("doubled braces are literal") {
    CHECK(render_placeholders("{{not a placeholder}}", {}) == "{not a placeholder}");
    CHECK(render_placeholders("set {{x}} to {value}", {{"value", "3"}}) == "set {x} to 3");
}

TEST_CASE("template files parse into sections") {
    PromptTemplate tpl = parse_template("t",
                                        "[system]\nsys text\n[user]\nline one\nline two\n"
                                        "[few_shot.user]\nshot q\n[few_shot.assistant]\nshot a\n");
    CHECK(tpl.system == "sys text");
    CHECK(tpl.user == "line one\nline two");
    REQUIRE(tpl.few_shot.size() == 1);
    CHECK(tpl.few_shot[0].first == "shot q");
    CHECK(tpl.few_shot[0].second == "shot a");

    auto messages = tpl.render({});
    REQUIRE(messages.size() == 4);
    CHECK(messages[0].role == Role::system);
    CHECK(messages[1].role == Role::user);
    CHECK(messages[2].role == Role::assistant);
    CHECK(messages[3].content == "line one\nline two");
}

TEST_CASE("templates without a system section render no system message") {
    PromptTemplate tpl = parse_template("t", "[user]\nhello {question}\n");
    auto messages = tpl.render({{"question", "there"}});
    REQUIRE(messages.size() == 1);
    CHECK(messages[0].role == Role::user);
    CHECK(messages[0].content == "hello there");
}

TEST_CASE("malformed templates are rejected") {
    CHECK_THROWS_AS(parse_template("t", "[user]\nx\n[bogus]\ny\n"), ConfigError);
    CHECK_THROWS_AS(parse_template("t", "[system]\nonly system\n"), ConfigError);
    CHECK_THROWS_AS(parse_template("t", "[user]\nx\n[few_shot.user]\ndangling\n"), ConfigError);
}

TEST_CASE("builtin store carries every pipeline template") {
    TemplateStore store = TemplateStore::builtin();
    for (const char* name :
         {"self_knowledge", "self_context", "self_context_no_knowledge", "self_fact",
          "self_think", "self_think_no_cot", "think", "reason", "variant_no_self_think",
          "variant_annotation", "variant_naive_cot", "baseline_no_context",
          "baseline_full_context"})
        CHECK(store.has(name));
    CHECK_THROWS_AS(store.get("no_such_template"), ConfigError);
}

TEST_CASE("builtin templates equal the files shipped under data/templates") {
    TemplateStore builtin = TemplateStore::builtin();
    TemplateStore from_disk = TemplateStore::builtin();
    from_disk.load_dir(testsupport::data_dir() / "templates");
    for (const auto& name : builtin.names()) {
        CHECK(from_disk.get(name).system == builtin.get(name).system);
        CHECK(from_disk.get(name).user == builtin.get(name).user);
    }
}

TEST_CASE("question_block appends lettered options") {
    CHECK(question_block("Pick one.", {"first", "second"}) ==
          "Pick one.\n\nOptions:\nA. first\nB. second");
    CHECK(question_block("No options.", {}) == "No options.");
}
