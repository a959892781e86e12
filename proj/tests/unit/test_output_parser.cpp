#include "cor/output_parser.hpp"
#include "cor/prompting.hpp"

#include <doctest.h>

#include <random>

using namespace cor;
using namespace cor::parsing;

namespace {

const std::vector<DocId> kOrder{40, 41, 42, 43, 44, 45, 46, 47, 48, 49};

}  // namespace

TEST_CASE("well-formed chain-of-rank output") {
    const auto p = parse_cor("## Relevant Context ID: 3, 7\n## Answer: Paris", kOrder);
    CHECK(p.flags.empty());
    CHECK(p.id_line_present);
    CHECK(p.id_line_text == "## Relevant Context ID: 3, 7");
    CHECK(p.selected_positions == std::vector<int>{3, 7});
    CHECK(p.selected_doc_ids == std::vector<DocId>{42, 46});
    CHECK(p.answer == "Paris");
    CHECK_FALSE(p.reasoning_text.has_value());
}

TEST_CASE("spacing and separators on the ID line are tolerated") {
    const auto p = parse_cor("preamble\n  ## Relevant Context ID:2 ,5,,  1\nnoise\n## Answer:   multi\nline  ", kOrder);
    CHECK(p.flags.empty());
    CHECK(p.selected_positions == std::vector<int>{2, 5, 1});
    CHECK(p.answer == "multi\nline");
}

TEST_CASE("each flag") {
    SUBCASE("missing ID line") {
        const auto p = parse_cor("## Answer: x", kOrder);
        CHECK(p.flags.has(ParseFlag::missing_id_line));
        CHECK(p.answer == "x");
        CHECK_FALSE(p.id_line_present);
    }
    SUBCASE("out of range and duplicates") {
        const auto p = parse_cor("## Relevant Context ID: 0, 11, 3, 3, 99999999999999999999\n## Answer: x", kOrder);
        CHECK(p.flags.has(ParseFlag::out_of_range_id));
        CHECK(p.flags.has(ParseFlag::duplicate_id));
        CHECK(p.selected_positions == std::vector<int>{3});
    }
    SUBCASE("garbage tokens") {
        const auto p = parse_cor("## Relevant Context ID: 2, Context4\n## Answer: x", kOrder);
        CHECK(p.flags.has(ParseFlag::trailing_garbage));
        CHECK(p.selected_positions == std::vector<int>{2});
    }
    SUBCASE("section after the answer") {
        const auto p = parse_cor("## Relevant Context ID: 2\n## Answer: x\n## Note: extra", kOrder);
        CHECK(p.flags.has(ParseFlag::trailing_garbage));
        CHECK(p.answer == "x");
    }
    SUBCASE("no answer line: whole text becomes the answer") {
        const auto p = parse_cor("## Relevant Context ID: 1\nParis", kOrder);
        CHECK(p.flags.has(ParseFlag::missing_answer_line));
        CHECK(p.answer == "## Relevant Context ID: 1\nParis");
    }
    SUBCASE("answer before the ID line is not used") {
        const auto p = parse_cor("## Answer: early\n## Relevant Context ID: 1", kOrder);
        CHECK(p.flags.has(ParseFlag::missing_answer_line));
    }
}

TEST_CASE("flag names round-trip") {
    ParseFlags f;
    f.set(ParseFlag::duplicate_id);
    f.set(ParseFlag::trailing_garbage);
    CHECK(f.names() == std::vector<std::string>{"duplicate_id", "trailing_garbage"});
    CHECK(ParseFlags::from_names(f.names()) == f);
}

TEST_CASE("non-ID modes") {
    const auto dsf = parse_output("## Answer: 42", ReasoningMode::dsf, kOrder);
    CHECK(dsf.flags.empty());
    CHECK(dsf.answer == "42");
    const auto cot = parse_output("## Reasoning: a\nb\n## Answer: c", ReasoningMode::cot, kOrder);
    CHECK(cot.flags.empty());
    CHECK(cot.reasoning_text == std::optional<std::string>("a\nb"));
    const auto bare = parse_output("thinking out loud\n## Answer: c", ReasoningMode::con, kOrder);
    CHECK(bare.reasoning_text == std::optional<std::string>("thinking out loud"));
    const auto both =
        parse_output("## Relevant Context ID: 4\n## Reasoning: r\n## Answer: c", ReasoningMode::cor_plus_cot, kOrder);
    CHECK(both.flags.empty());
    CHECK(both.selected_doc_ids == std::vector<DocId>{43});
    CHECK(both.reasoning_text == std::optional<std::string>("r"));
}

TEST_CASE("small fuzz and round trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        std::string raw(rng() % 80, '\0');
        for (auto& c : raw) c = static_cast<char>(rng() % 256);
        if (i % 3 == 0) raw = "## Relevant Context ID: " + raw;
        CHECK_NOTHROW((void)parse_cor(raw, kOrder));
    }
    for (int i = 0; i < 500; ++i) {
        std::vector<int> ids;
        for (int p = 1; p <= 10; ++p) {
            if (rng() % 3 == 0) ids.push_back(p);
        }
        if (ids.empty()) ids.push_back(1);
        std::shuffle(ids.begin(), ids.end(), rng);
        const std::string answer = "ans " + std::to_string(rng());
        const auto p = parse_cor(prompting::render_target(ReasoningMode::cor, ids, std::nullopt, answer, 10), kOrder);
        CHECK(p.flags.empty());
        CHECK(p.selected_positions == ids);
        CHECK(p.answer == answer);
    }
}

TEST_CASE("judge verdicts: last yes/no token wins") {
    CHECK(parse_judge("Yes") == JudgeVerdict::yes);
    CHECK(parse_judge("No, it is not.") == JudgeVerdict::no);
    CHECK(parse_judge("At first no, but on reflection YES.") == JudgeVerdict::yes);
    CHECK(parse_judge("Yes. Answer: no") == JudgeVerdict::no);
    CHECK(parse_judge("yesterday nothing") == JudgeVerdict::unparseable);
    CHECK(parse_judge("") == JudgeVerdict::unparseable);
    CHECK(parse_verdict_name(to_string(JudgeVerdict::unparseable)) == JudgeVerdict::unparseable);
}
