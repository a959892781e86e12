#include "cor/corpus.hpp"
#include "cor/error.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace cor;
using support::fixture;

TEST_CASE("hotpot ingestion keeps entries with a matching gold title") {
    const auto r = corpus::ingest_hotpot(fixture("hotpot_dev_distractor_sample.json"), corpus::HotpotSplit::dev);
    REQUIRE(r.examples.size() == 2);
    CHECK(r.skipped_no_gold == 1);
    CHECK(r.skipped_context_count == 0);

    const auto& first = r.examples[0];
    CHECK(first.example_id == "5a8b57f25542995d1e6f1371");
    CHECK(first.pool_size() == 10);
    CHECK(first.gold_ids == std::vector<DocId>{1});
    CHECK(first.gold_answers == std::vector<std::string>{"Gustave Eiffel"});
    // leading spaces of upstream sentences are trimmed before joining
    CHECK(first.doc(1).body ==
          "The Eiffel Tower is a wrought-iron lattice tower in Paris. It was designed by Gustave Eiffel's company.");
    CHECK(first.doc(1).title == "Eiffel Tower");
    CHECK(first.context(1).is_gold);
    CHECK_FALSE(first.context(2).is_gold);
    CHECK_NOTHROW(first.check_invariants());

    const auto& second = r.examples[1];
    CHECK(second.gold_ids == std::vector<DocId>{1, 2});
    CHECK(second.reference_answer() == "yes");
}

TEST_CASE("malformed hotpot entries raise with the entry index") {
    try {
        (void)corpus::ingest_hotpot(fixture("hotpot_malformed.json"), corpus::HotpotSplit::train);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.entry_index() == 1);
    }
    CHECK_THROWS_AS((void)corpus::ingest_hotpot(fixture("does_not_exist.json"), corpus::HotpotSplit::dev), Error);
}

TEST_CASE("gorilla ingestion shares one pool per framework") {
    const auto g = corpus::ingest_gorilla(fixture("gorilla_torchhub_api.jsonl"), fixture("gorilla_torchhub_queries.jsonl"),
                                          "torchhub");
    REQUIRE(g.apis.size() == 10);
    REQUIRE(g.examples.size() == 12);
    for (const auto& ex : g.examples) {
        CHECK(ex.pool.get() == g.examples[0].pool.get());
        CHECK(ex.task_kind == TaskKind::api);
        REQUIRE(ex.gold_api.has_value());
        CHECK(ex.reference_answer() == ex.gold_api->api_call);
        CHECK(ex.doc(ex.gold_ids[0]).body == corpus::serialize_api_body(*ex.gold_api));
        CHECK(ex.doc(ex.gold_ids[0]).title.empty());
        CHECK_NOTHROW(ex.check_invariants());
    }
    const auto& resnet = g.apis[0];
    CHECK(resnet.api_id == "th-resnet18");
    CHECK(resnet.framework == "torchhub");
    CHECK(resnet.api_arguments.at("model") == "resnet18");
    CHECK(resnet.api_arguments.at("pretrained") == "True");
    const auto& densenet = g.apis[1];
    CHECK(densenet.api_arguments.at("#0") == "pytorch/vision:v0.10.0");
    CHECK(densenet.api_arguments.at("#1") == "densenet121");
}

TEST_CASE("canonical store round-trips and rejects other versions") {
    auto hp = corpus::ingest_hotpot(fixture("hotpot_dev_distractor_sample.json"), corpus::HotpotSplit::dev).examples;
    const auto g = corpus::ingest_gorilla(fixture("gorilla_huggingface_api.jsonl"),
                                          fixture("gorilla_huggingface_queries.jsonl"), "huggingface");
    std::vector<corpus::Example> all = hp;
    all.insert(all.end(), g.examples.begin(), g.examples.end());

    const std::string text = corpus::to_canonical_text(all);
    const auto back = corpus::from_canonical_text(text);
    REQUIRE(back.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(back[i] == all[i]);
    // shared pools stay shared after loading
    CHECK(back[2].pool.get() == back[3].pool.get());
    CHECK(corpus::to_canonical_text(back) == text);

    support::TempDir dir;
    corpus::save_canonical(all, dir / "store.jsonl");
    CHECK(corpus::load_canonical(dir / "store.jsonl").size() == all.size());

    const auto first_newline = text.find('\n');
    const std::string bumped = "{\"format\":\"cor-canonical\",\"version\":2}" + text.substr(first_newline);
    try {
        (void)corpus::from_canonical_text(bumped);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("expected 1") != std::string::npos);
    }
    const std::string broken = text.substr(0, first_newline + 1) + "{not json\n";
    try {
        (void)corpus::from_canonical_text(broken);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("example invariants") {
    auto ex = support::synthetic_examples(1, 7)[0];
    CHECK_NOTHROW(ex.check_invariants());
    CHECK_THROWS_AS((void)ex.doc(0), InvalidArgument);
    CHECK_THROWS_AS((void)ex.doc(11), InvalidArgument);
    ex.gold_ids = {};
    CHECK_THROWS_AS(ex.check_invariants(), InvalidArgument);
}
