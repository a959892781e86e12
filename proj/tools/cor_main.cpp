#include "cor/commands.hpp"
#include "cor/error.hpp"
#include "cor/run_config.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

namespace {

using namespace cor;

struct Overrides {
    std::string mode;
    std::size_t k = 0;
    std::string forced_ranking;
    std::string backend_url;
    std::optional<std::uint64_t> seed;
    std::string output_dir;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--mode", o.mode, "dsf | cot | con | cor | cor_plus_cot");
    cmd->add_option("--k", o.k, "contexts per prompt");
    cmd->add_option("--output-dir", o.output_dir, "run or emission directory");
    cmd->add_option("--seed", o.seed, "run seed");
}

config::RunConfig load(const std::string& path, const Overrides& o, bool emit) {
    auto c = config::load_config(path);
    if (!o.mode.empty()) {
        const auto mode = parse_reasoning_mode(o.mode);
        if (!mode) throw ConfigError("unknown mode '" + o.mode + "'");
        c.mode = *mode;
    }
    if (o.k > 0) (emit ? c.emit.k : c.k) = o.k;
    if (!o.forced_ranking.empty()) c.forced_ranking = o.forced_ranking;
    if (!o.backend_url.empty()) {
        c.backend.url = o.backend_url;
        c.backend.kind = "http";
    }
    if (o.seed) (emit ? c.emit.seed : c.seed) = *o.seed;
    if (!o.output_dir.empty()) c.output_dir = o.output_dir;
    return c;
}

void print_validation(const sft::ValidationReport& v) {
    for (const auto& f : v.failures) std::cerr << "record " << f.index << " (" << f.example_id << "): " << f.reason << "\n";
    std::cout << v.checked << " records checked, " << v.failures.size() << " failures\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chain-of-rank evaluation and training-data harness"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");

    auto* ingest = app.add_subcommand("ingest", "convert an upstream dataset to the canonical store");
    ingest->require_subcommand(1);
    auto* hotpot = ingest->add_subcommand("hotpot", "distractor-format HotPotQA JSON");
    std::string hotpot_in, hotpot_split = "dev", ingest_out;
    hotpot->add_option("--input", hotpot_in, "upstream JSON file")->required()->check(CLI::ExistingFile);
    hotpot->add_option("--split", hotpot_split, "train | dev")->check(CLI::IsMember({"train", "dev"}));
    hotpot->add_option("--out", ingest_out, "canonical store to write")->required();
    auto* gorilla = ingest->add_subcommand("gorilla", "Gorilla API database and queries");
    std::string api_db, queries, framework;
    gorilla->add_option("--api-db", api_db, "API records, one JSON object per line")->required()->check(CLI::ExistingFile);
    gorilla->add_option("--queries", queries, "queries, one JSON object per line")->required()->check(CLI::ExistingFile);
    gorilla->add_option("--framework", framework, "framework name, e.g. torchhub")->required();
    gorilla->add_option("--out", ingest_out, "canonical store to write")->required();

    std::string config_path;
    Overrides eval_o, emit_o, judge_o;

    auto* eval = app.add_subcommand("eval", "run the evaluation pipeline");
    eval->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    add_overrides(eval, eval_o);
    eval->add_option("--forced-ranking", eval_o.forced_ranking, "correct | wrong | comma-separated positions");
    eval->add_option("--backend-url", eval_o.backend_url, "chat-completions endpoint (selects the http backend)");

    auto* emit = app.add_subcommand("emit", "write supervised finetuning records");
    emit->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    add_overrides(emit, emit_o);
    std::optional<double> p_golden;
    emit->add_option("--p-golden", p_golden, "share of records whose contexts include gold");

    auto* validate = app.add_subcommand("validate", "check an SFT file");
    std::string sft_file;
    validate->add_option("sft", sft_file, "SFT file")->required()->check(CLI::ExistingFile);

    auto* judge = app.add_subcommand("judge", "judge the reasoning of a finished run");
    std::string run_dir;
    judge->add_option("--config", config_path, "JSON config holding the judge settings")->required()->check(CLI::ExistingFile);
    judge->add_option("--run-dir", run_dir, "eval run directory")->required()->check(CLI::ExistingDirectory);
    judge->add_option("--seed", judge_o.seed, "context shuffle seed");

    auto* report = app.add_subcommand("report", "compare finished runs");
    std::vector<std::string> run_dirs;
    std::string report_json;
    report->add_option("runs", run_dirs, "run directories")->required()->check(CLI::ExistingDirectory);
    report->add_option("--json", report_json, "also write the comparison as JSON");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*hotpot) {
            const auto s = commands::cmd_ingest_hotpot(
                hotpot_in, hotpot_split == "train" ? corpus::HotpotSplit::train : corpus::HotpotSplit::dev, ingest_out);
            std::cout << s.examples << " examples written to " << s.output.string() << " (" << s.skipped << " skipped)\n";
        } else if (*gorilla) {
            const auto s = commands::cmd_ingest_gorilla(api_db, queries, framework, ingest_out);
            std::cout << s.examples << " examples written to " << s.output.string() << "\n";
        } else if (*eval) {
            const auto outcome = commands::cmd_eval(load(config_path, eval_o, false));
            std::ifstream table(outcome.run_dir / "table.txt");
            std::cout << table.rdbuf();
            return outcome.exit_code;
        } else if (*emit) {
            auto c = load(config_path, emit_o, true);
            if (p_golden) c.emit.p_golden = *p_golden;
            const auto outcome = commands::cmd_emit(c);
            std::cout << outcome.emitted.records.size() << " records written to " << outcome.sft_path.string() << "\n";
            print_validation(outcome.validation);
            return outcome.exit_code;
        } else if (*validate) {
            const auto outcome = commands::cmd_validate(sft_file);
            print_validation(outcome.validation);
            return outcome.exit_code;
        } else if (*judge) {
            auto c = config::load_config(config_path);
            if (judge_o.seed) c.judge_seed = *judge_o.seed;
            const auto outcome = commands::cmd_judge(c, run_dir);
            std::cout << "yes " << outcome.report.yes << ", no " << outcome.report.no << ", unparseable "
                      << outcome.report.unparseable << ", skipped " << outcome.skipped.size() << "; yes-rate "
                      << 100.0 * outcome.report.yes_rate << "%\n";
        } else if (*report) {
            std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
            const auto outcome = commands::cmd_report(dirs);
            std::cout << outcome.table;
            if (!report_json.empty()) {
                std::ofstream out(report_json, std::ios::binary | std::ios::trunc);
                out << outcome.json;
            }
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return commands::kExitConfig;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return commands::kExitConfig;
    }
    return commands::kExitOk;
}
