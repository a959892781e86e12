#include "cor/commands.hpp"
#include "cor/error.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace cor;
using namespace cor::commands;
using nlohmann::json;

namespace {

struct Workspace {
    support::TempDir dir;
    std::string store;

    explicit Workspace(std::size_t n = 12) {
        store = (dir / "store.jsonl").string();
        corpus::save_canonical(support::synthetic_examples(n, 17), store);
    }

    config::RunConfig config(const std::string& extra = "", const std::string& out = "run") const {
        auto c = config::parse_config("{\"datasets\": \"" + store + "\", \"k\": 5" + extra + "}");
        c.output_dir = (dir / out).string();
        return c;
    }
};

json read_json(const std::filesystem::path& p) {
    return json::parse(support::slurp(p));
}

}  // namespace

TEST_CASE("ingest commands write canonical stores") {
    support::TempDir dir;
    const auto hp = cmd_ingest_hotpot(support::fixture("hotpot_dev_distractor_sample.json"), corpus::HotpotSplit::dev,
                                      dir / "hp.jsonl");
    CHECK(hp.examples == 2);
    CHECK(hp.skipped == 1);
    CHECK(corpus::load_canonical(dir / "hp.jsonl").size() == 2);
    const auto g = cmd_ingest_gorilla(support::fixture("gorilla_tensorflow_api.jsonl"),
                                      support::fixture("gorilla_tensorflow_queries.jsonl"), "tensorflow",
                                      dir / "tf.jsonl");
    CHECK(g.examples == corpus::load_canonical(dir / "tf.jsonl").size());
}

TEST_CASE("eval with the oracle mock scores perfectly") {
    Workspace ws;
    const auto out = cmd_eval(ws.config());
    CHECK(out.exit_code == kExitOk);
    const auto& a = out.report.aggregates;
    CHECK(a.count == 12);
    CHECK(a.failed == 0);
    CHECK(*a.em_pct == 100.0);
    CHECK(*a.f1_pct == 100.0);
    CHECK(a.ranking_exact_pct == 100.0);
    for (const char* f : {"run.json", "examples.jsonl", "summary.json", "table.txt"}) {
        CHECK(std::filesystem::exists(out.run_dir / f));
    }
    const auto run = read_json(out.run_dir / "run.json");
    CHECK(run["backend_id"] == "oracle-mock/cor");
    CHECK(run["config"].contains("output_dir") == false);
    CHECK(run["input_digests"].contains(ws.store));
    CHECK(read_json(out.run_dir / "summary.json")["metadata"]["retrieval_pool"] == "per-example");
    const auto rows = support::slurp(out.run_dir / "examples.jsonl");
    const auto first = json::parse(rows.substr(0, rows.find('\n')));
    CHECK(first["example_id"] == "syn-000000");
    CHECK(first["context_order"].size() == 5);
}

TEST_CASE("forced wrong ranking keeps answers but breaks ranking") {
    Workspace ws;
    const auto out = cmd_eval(ws.config(", \"prompting\": {\"forced_ranking\": \"wrong\"}"));
    CHECK(out.report.aggregates.ranking_exact_pct == 0.0);
    CHECK(out.report.aggregates.ranking_contains_gold_pct == 0.0);
    CHECK(*out.report.aggregates.em_pct == 100.0);
}

TEST_CASE("answer-only mode shows no ranking column") {
    Workspace ws;
    const auto out = cmd_eval(ws.config(", \"mode\": \"dsf\""));
    CHECK(*out.report.aggregates.em_pct == 100.0);
    const auto table = support::slurp(out.run_dir / "table.txt");
    CHECK(table.find("dsf") != std::string::npos);
    CHECK(table.find(" - ") != std::string::npos);
    CHECK_THROWS_AS((void)cmd_judge(ws.config(), out.run_dir), ConfigError);
}

TEST_CASE("all examples failing gives its own exit code") {
    Workspace ws(3);
    backend::ScriptedBackend empty({});
    const auto out = cmd_eval(ws.config(), &empty);
    CHECK(out.exit_code == kExitAllFailed);
    CHECK(out.report.aggregates.failed == 3);
    CHECK(*out.report.aggregates.em_pct == 0.0);
}

TEST_CASE("identical runs are byte-identical") {
    Workspace ws;
    const auto a = cmd_eval(ws.config(", \"prompting\": {\"shuffle\": true}", "a"));
    const auto b = cmd_eval(ws.config(", \"prompting\": {\"shuffle\": true}", "b"));
    for (const char* f : {"run.json", "examples.jsonl", "summary.json", "table.txt"}) {
        CHECK(support::slurp(a.run_dir / f) == support::slurp(b.run_dir / f));
    }
}

TEST_CASE("judge and report") {
    Workspace ws;
    const auto run = cmd_eval(ws.config("", "cor_run"));
    backend::ScriptedBackend yes({{"*", {"Yes", std::nullopt}}});
    const auto judged = cmd_judge(ws.config(), run.run_dir, &yes);
    CHECK(judged.report.tasks.size() == 12);
    CHECK(judged.report.yes_rate == 1.0);
    CHECK(std::filesystem::exists(run.run_dir / "judge.jsonl"));
    const auto summary = read_json(run.run_dir / "summary.json");
    CHECK(summary["aggregates"]["judge_yes_pct"] == 100.0);

    const auto other = cmd_eval(ws.config(", \"mode\": \"dsf\"", "dsf_run"));
    const auto report = cmd_report({run.run_dir, other.run_dir});
    CHECK(report.table.find("cor_run") != std::string::npos);
    CHECK(report.table.find("dsf_run") != std::string::npos);
    CHECK(cmd_report({run.run_dir, other.run_dir}).table == report.table);
    CHECK(json::parse(report.json).size() >= 1);
    CHECK_THROWS_AS((void)cmd_report({}), ConfigError);
}

TEST_CASE("emit and validate") {
    Workspace ws(20);
    auto c = ws.config(", \"emit\": {\"p_golden\": 0.5, \"k\": 4, \"seed\": 3}", "sft");
    const auto out = cmd_emit(c);
    CHECK(out.exit_code == kExitOk);
    CHECK(out.validation.ok());
    CHECK(out.emitted.records.size() == 20);
    const auto v = cmd_validate(out.sft_path);
    CHECK(v.exit_code == kExitOk);
    CHECK(v.validation.checked == 20);

    const std::string bytes = support::slurp(out.sft_path);
    (void)cmd_emit(c);
    CHECK(support::slurp(out.sft_path) == bytes);

    auto records = sft::read_sft(out.sft_path);
    records[0].gold_present = !records[0].gold_present;
    sft::write_sft(records, ws.dir / "broken.jsonl");
    CHECK(cmd_validate(ws.dir / "broken.jsonl").exit_code == kExitValidation);
}

TEST_CASE("forced prefixes") {
    const auto ex = support::synthetic_examples(1, 2, {6, 1})[0];
    const std::vector<DocId> order{ex.gold_ids[0], ex.gold_ids[0] == 1 ? DocId{2} : DocId{1}};
    CHECK_FALSE(forced_prefix("", ex, order).has_value());
    CHECK(forced_prefix("correct", ex, order) == std::optional<std::string>("## Relevant Context ID: 1\n"));
    CHECK(forced_prefix("wrong", ex, order) == std::optional<std::string>("## Relevant Context ID: 2\n"));
    CHECK(forced_prefix("2,1", ex, order) == std::optional<std::string>("## Relevant Context ID: 2, 1\n"));
    CHECK_THROWS_AS((void)forced_prefix("3", ex, order), InvalidArgument);
    CHECK_THROWS_AS((void)forced_prefix("wrong", ex, {ex.gold_ids[0]}), InvalidArgument);
}
