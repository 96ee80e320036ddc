#include <doctest.h>

#include "faithfulrag/datasets.hpp"
#include "faithfulrag/errors.hpp"
#include "faithfulrag/util.hpp"
#include "support.hpp"

using namespace faithfulrag;

namespace {

std::filesystem::path write_jsonl(const testsupport::TempDir& dir, const std::string& name,
                                  const std::string& content) {
    auto path = dir.path() / name;
    util::write_file(path, content);
    return path;
}

} // namespace

TEST_CASE("generic schema loads a minimal line") {
    testsupport::TempDir dir("ds");
    auto path = write_jsonl(dir, "a.jsonl",
                            R"({"id":"1","question":"q","context":"c","answers":["a"]})"
                            "\n");
    Dataset dataset = load_jsonl(path, SchemaKind::generic);
    REQUIRE(dataset.items.size() == 1);
    CHECK(dataset.items[0].id == "1");
    CHECK(dataset.items[0].answers == std::vector<std::string>{"a"});
    CHECK_FALSE(dataset.items[0].golden_context.has_value());
}

TEST_CASE("kre_conflict schema requires substituted answers, naming field and line") {
    testsupport::TempDir dir("ds");
    auto path = write_jsonl(
        dir, "k.jsonl",
        R"({"id":"1","question":"q","context":"c","golden_context":"g","answers":["a"]})"
        "\n");
    try {
        load_jsonl(path, SchemaKind::kre_conflict);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(util::contains(e.what(), "substituted_answers"));
        CHECK(util::contains(e.what(), "line 1"));
    }
}

TEST_CASE("duplicate ids are rejected") {
    testsupport::TempDir dir("ds");
    auto path = write_jsonl(dir, "d.jsonl",
                            R"({"id":"1","question":"q","context":"c","answers":["a"]})"
                            "\n"
                            R"({"id":"1","question":"q2","context":"c2","answers":["b"]})"
                            "\n");
    CHECK_THROWS_AS(load_jsonl(path, SchemaKind::generic), DuplicateId);
}

TEST_CASE("errors from every bad line are collected with line numbers") {
    testsupport::TempDir dir("ds");
    auto path = write_jsonl(dir, "bad.jsonl",
                            "not json\n"
                            R"({"id":"2","question":"q","context":"c"})"
                            "\n"
                            R"({"id":"3","question":"q","context":"c","answers":["a"]})"
                            "\n");
    try {
        load_jsonl(path, SchemaKind::generic);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(util::contains(e.what(), "line 1"));
        CHECK(util::contains(e.what(), "line 2"));
        CHECK(util::contains(e.what(), "answers"));
    }
}

TEST_CASE("substituted answers must be disjoint from golds after normalization") {
    testsupport::TempDir dir("ds");
    auto path = write_jsonl(
        dir, "s.jsonl",
        R"({"id":"1","question":"q","context":"c","golden_context":"g","answers":["Paris"],)"
        R"("substituted_answers":["the paris!"]})"
        "\n");
    CHECK_THROWS_AS(load_jsonl(path, SchemaKind::kre_conflict), SchemaError);
}

TEST_CASE("multiple_choice schema validates options") {
    testsupport::TempDir dir("ds");
    auto one_option = write_jsonl(
        dir, "m.jsonl",
        R"({"id":"1","question":"q","context":"c","answers":["a"],"options":["a"]})"
        "\n");
    CHECK_THROWS_AS(load_jsonl(one_option, SchemaKind::multiple_choice), SchemaError);

    auto duplicated = write_jsonl(
        dir, "m2.jsonl",
        R"({"id":"1","question":"q","context":"c","answers":["a"],"options":["a","A"]})"
        "\n");
    CHECK_THROWS_AS(load_jsonl(duplicated, SchemaKind::multiple_choice), SchemaError);
}

TEST_CASE("realtime schema requires the answerable flag") {
    testsupport::TempDir dir("ds");
    auto missing = write_jsonl(dir, "r.jsonl",
                               R"({"id":"1","question":"q","context":"c","answers":["a"]})"
                               "\n");
    CHECK_THROWS_AS(load_jsonl(missing, SchemaKind::realtime), SchemaError);
    auto ok = write_jsonl(
        dir, "r2.jsonl",
        R"({"id":"1","question":"q","context":"c","answers":["a"],"answerable":false})"
        "\n");
    Dataset dataset = load_jsonl(ok, SchemaKind::realtime);
    CHECK(dataset.items[0].answerable == false);
}

TEST_CASE("select_context picks by scenario and enforces golden presence") {
    QAItem item;
    item.id = "1";
    item.context = "negative";
    CHECK(select_context(item, Scenario::conflict) == "negative");
    CHECK_THROWS_AS(select_context(item, Scenario::golden), MissingGoldenContext);
    item.golden_context = "golden";
    CHECK(select_context(item, Scenario::golden) == "golden");
}

TEST_CASE("serialization round-trip is idempotent line for line") {
    auto path = testsupport::data_dir() / "datasets" / "sample20.jsonl";
    Dataset dataset = load_jsonl(path, SchemaKind::kre_conflict);
    std::string serialized = serialize_dataset(dataset);

    testsupport::TempDir dir("ds");
    auto rewritten = write_jsonl(dir, "rt.jsonl", serialized);
    Dataset reloaded = load_jsonl(rewritten, SchemaKind::kre_conflict);
    CHECK(serialize_dataset(reloaded) == serialized);
    CHECK(reloaded.content_sha256() == dataset.content_sha256());
}

TEST_CASE("the bundled sample loads with 20 valid conflict items") {
    Dataset dataset =
        load_jsonl(testsupport::data_dir() / "datasets" / "sample20.jsonl",
                   SchemaKind::kre_conflict);
    CHECK(dataset.items.size() == 20);
    for (const auto& item : dataset.items) {
        CHECK(item.golden_context.has_value());
        CHECK(item.substituted_answers.has_value());
        CHECK(util::contains(item.context, (*item.substituted_answers)[0]));
        CHECK(util::contains(*item.golden_context, item.answers[0]));
    }
}

TEST_CASE("the manifest verifies the bundled dataset digest") {
    auto entries = load_manifest(testsupport::data_dir() / "datasets" / "manifest.json", true);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].name == "sample20");
    CHECK(entries[0].schema == "kre_conflict");

    // A corrupted digest must be detected.
    testsupport::TempDir dir("mf");
    util::write_file(dir.path() / "x.jsonl", "{}\n");
    util::write_file(dir.path() / "manifest.json",
                     R"({"datasets":[{"name":"x","path":"x.jsonl","schema":"generic",)"
                     R"("sha256":"0000000000000000000000000000000000000000000000000000000000000000"}]})");
    CHECK_THROWS_AS(load_manifest(dir.path() / "manifest.json", true), SchemaError);
}
