// Command-line front end: wires the library modules into a file-based
// pipeline (ingest -> preprocess -> embed -> build-kg -> split -> gen-train
// -> eval / sweep). All state lives in files under --output-dir.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "casekit/backend.hpp"
#include "casekit/builder.hpp"
#include "casekit/corpus.hpp"
#include "casekit/embedding.hpp"
#include "casekit/eval.hpp"
#include "casekit/graph.hpp"
#include "casekit/io.hpp"
#include "casekit/rng.hpp"
#include "casekit/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace casekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitTransport = 2;
constexpr int kExitInfeasible = 3;

struct EngineConfig {
    std::string corpus_path;
    std::string output_dir = "out";
    std::size_t embed_dim = 512;
    int choices = 10;
    std::size_t token_budget = 4096;
    std::uint64_t seed = 0;
    int jobs = 1;
    BackendConfig backend;
    SplitConfig split;

    void validate() const {
        if (choices < 6 || choices > 11) {
            throw Error("choices must be between 6 and 11, got " + std::to_string(choices));
        }
        if (token_budget < 512) throw Error("token_budget must be at least 512");
        if (embed_dim == 0) throw Error("embed_dim must be positive");
        if (jobs < 1) throw Error("jobs must be at least 1");
        backend.validate();
    }
};

json backend_to_json(const BackendConfig& b) {
    json j;
    j["kind"] = std::string(backend_kind_name(b.kind));
    j["endpoint"] = b.endpoint;
    j["model_name"] = b.model_name;
    j["api_key_env"] = b.api_key_env;
    j["timeout_ms"] = b.timeout.count();
    j["max_retries"] = b.max_retries;
    j["retry_backoff_ms"] = b.retry_backoff.count();
    j["temperature"] = b.temperature;
    j["seed"] = b.seed;
    j["fixed_text"] = b.fixed_text;
    return j;
}

void backend_from_json(const json& j, BackendConfig& b) {
    if (j.contains("kind")) b.kind = backend_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("endpoint")) b.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model_name")) b.model_name = j.at("model_name").get<std::string>();
    if (j.contains("api_key_env")) b.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("timeout_ms")) {
        b.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<std::int64_t>());
    }
    if (j.contains("max_retries")) b.max_retries = j.at("max_retries").get<int>();
    if (j.contains("retry_backoff_ms")) {
        b.retry_backoff = std::chrono::milliseconds(j.at("retry_backoff_ms").get<std::int64_t>());
    }
    if (j.contains("temperature")) b.temperature = j.at("temperature").get<double>();
    if (j.contains("seed")) b.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fixed_text")) b.fixed_text = j.at("fixed_text").get<std::string>();
}

json config_to_json(const EngineConfig& c) {
    json j;
    j["corpus_path"] = c.corpus_path;
    j["output_dir"] = c.output_dir;
    j["embed_dim"] = c.embed_dim;
    j["choices"] = c.choices;
    j["token_budget"] = c.token_budget;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["backend"] = backend_to_json(c.backend);
    j["split"] = {{"train_fraction", c.split.train_fraction},
                  {"min_precedents", c.split.min_precedents},
                  {"seed", c.split.seed},
                  {"balance_classes", c.split.balance_classes}};
    return j;
}

void config_from_json(const json& j, EngineConfig& c) {
    if (j.contains("corpus_path")) c.corpus_path = j.at("corpus_path").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("embed_dim")) c.embed_dim = j.at("embed_dim").get<std::size_t>();
    if (j.contains("choices")) c.choices = j.at("choices").get<int>();
    if (j.contains("token_budget")) c.token_budget = j.at("token_budget").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
    if (j.contains("backend")) backend_from_json(j.at("backend"), c.backend);
    if (j.contains("split")) {
        const json& s = j.at("split");
        if (s.contains("train_fraction")) {
            c.split.train_fraction = s.at("train_fraction").get<double>();
        }
        if (s.contains("min_precedents")) {
            c.split.min_precedents = s.at("min_precedents").get<std::size_t>();
        }
        if (s.contains("seed")) c.split.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("balance_classes")) {
            c.split.balance_classes = s.at("balance_classes").get<bool>();
        }
    }
}

// Paths of the conventional artifacts under output_dir.
struct Artifacts {
    fs::path dir;
    fs::path processed() const { return dir / "processed.jsonl"; }
    fs::path stats() const { return dir / "stats.json"; }
    fs::path index() const { return dir / "index.bin"; }
    fs::path kg_triples() const { return dir / "kg-triples.jsonl"; }
    fs::path kg_entities() const { return dir / "kg-entities.json"; }
    fs::path train_ids() const { return dir / "train.txt"; }
    fs::path test_ids() const { return dir / "test.txt"; }
    fs::path train_set() const { return dir / "train.jsonl"; }
    fs::path manifest() const { return dir / "manifest.json"; }
};

void record_manifest(const Artifacts& art, const EngineConfig& config,
                     const std::string& subcommand, const json& extra) {
    json manifest;
    if (fs::exists(art.manifest())) {
        manifest = json::parse(read_file(art.manifest()));
    }
    json entry;
    entry["subcommand"] = subcommand;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(config).dump())));
    entry["config_hash"] = hash;
    entry["seed"] = config.seed;
    entry["backend_seed"] = config.backend.seed;
    entry["split_seed"] = config.split.seed;
    entry["config"] = config_to_json(config);
    entry["outputs"] = extra;
    manifest["runs"].push_back(entry);
    atomic_write_file(art.manifest(), manifest.dump(2));
}

std::vector<ProcessedCase> load_processed(const fs::path& path) {
    auto result = parse_processed_corpus(path);
    if (!result.errors.empty()) {
        std::string msg = "invalid records in " + path.string() + ":";
        for (const auto& e : result.errors) {
            msg += "\n  line " + std::to_string(e.line) + ": " + e.message;
        }
        throw Error(msg);
    }
    return std::move(result.cases);
}

std::set<CaseId> load_ids(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read id manifest: " + path.string());
    std::set<CaseId> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ids.insert(line);
    }
    return ids;
}

void write_ids(const fs::path& path, const std::set<CaseId>& ids) {
    std::string out;
    for (const CaseId& id : ids) {
        out += id;
        out += '\n';
    }
    atomic_write_file(path, out);
}

// Everything eval/gen-train/sweep need, loaded from prior artifacts.
struct LoadedState {
    CaseStore store;
    HashedBowEmbedder embedder{512};
    VectorIndex index{512};
    KnowledgeGraph kg;
    std::set<CaseId> train;
    std::set<CaseId> test;
};

LoadedState load_state(const Artifacts& art, const EngineConfig& config) {
    LoadedState state;
    state.store = CaseStore(load_processed(art.processed()));
    state.embedder = HashedBowEmbedder(config.embed_dim, CorpusStats::load(art.stats()));
    state.index = VectorIndex::load(art.index());
    if (state.index.dim() != config.embed_dim) {
        throw Error("index dim " + std::to_string(state.index.dim()) +
                    " does not match embed_dim " + std::to_string(config.embed_dim));
    }
    state.kg = KnowledgeGraph::load(art.kg_triples(), art.kg_entities());
    state.train = load_ids(art.train_ids());
    state.test = load_ids(art.test_ids());
    return state;
}

int run_ingest(const EngineConfig& config, const Artifacts& art) {
    auto result = parse_corpus(config.corpus_path);
    json report;
    report["cases"] = result.cases.size();
    report["errors"] = json::array();
    for (const auto& e : result.errors) {
        report["errors"].push_back({{"line", e.line}, {"message", e.message}});
    }
    atomic_write_file(art.dir / "ingest-report.json", report.dump(2));
    std::cout << "parsed " << result.cases.size() << " cases, " << result.errors.size()
              << " invalid records\n";
    record_manifest(art, config, "ingest", {{"report", "ingest-report.json"}});
    if (result.cases.empty()) {
        std::cerr << "no valid cases in corpus\n";
        return kExitError;
    }
    return result.errors.empty() ? kExitOk : kExitError;
}

int run_preprocess(const EngineConfig& config, const Artifacts& art, const std::string& mode,
                   std::size_t sentences) {
    auto parsed = parse_corpus(config.corpus_path);
    if (!parsed.errors.empty()) {
        std::cerr << parsed.errors.size() << " invalid records; run ingest for details\n";
        return kExitError;
    }
    std::vector<ProcessedCase> processed;
    std::vector<std::string> failures;
    if (mode == "extractive") {
        for (const RawCase& raw : parsed.cases) {
            try {
                processed.push_back(extractive_preprocess(raw, sentences));
            } catch (const Error& e) {
                failures.push_back(e.what());
            }
        }
    } else {
        // Summarization through the configured backend, batched.
        std::vector<PromptInstance> prompts;
        for (const RawCase& raw : parsed.cases) {
            PromptInstance inst;
            inst.task = Task::Ljp;  // unused by the backend; carries the text
            inst.input_case = raw.id;
            inst.instruction_text = build_preprocess_prompt(raw);
            prompts.push_back(std::move(inst));
        }
        auto completions = complete_batch(prompts, config.backend, config.jobs);
        for (std::size_t i = 0; i < parsed.cases.size(); ++i) {
            if (!completions[i].ok()) {
                failures.push_back(parsed.cases[i].id + ": " + *completions[i].error);
                continue;
            }
            try {
                auto answer = parse_preprocess_response(completions[i].text);
                if (summary_mentions_verdict(answer.summary)) {
                    failures.push_back(parsed.cases[i].id + ": summary leaks the verdict");
                    continue;
                }
                processed.push_back(
                    make_processed(parsed.cases[i], answer.summary, answer.verdict));
            } catch (const Error& e) {
                failures.push_back(parsed.cases[i].id + ": " + e.what());
            }
        }
    }
    write_corpus(art.processed(), processed);
    json report;
    report["mode"] = mode;
    report["processed"] = processed.size();
    report["failures"] = failures;
    atomic_write_file(art.dir / "preprocess-report.json", report.dump(2));
    std::cout << "wrote " << processed.size() << " processed cases (" << failures.size()
              << " failures)\n";
    record_manifest(art, config, "preprocess",
                    {{"processed", "processed.jsonl"}, {"report", "preprocess-report.json"}});
    return failures.empty() ? kExitOk : kExitError;
}

int run_embed(const EngineConfig& config, const Artifacts& art, const std::string& ids_path) {
    auto cases = load_processed(art.processed());
    std::optional<std::set<CaseId>> restrict;
    if (!ids_path.empty()) restrict = load_ids(ids_path);

    CorpusStats stats;
    for (const ProcessedCase& c : cases) {
        if (restrict && !restrict->count(c.id)) continue;
        stats.add_document(render_case(c, false));
    }
    HashedBowEmbedder embedder(config.embed_dim, stats);
    VectorIndex index(config.embed_dim);
    for (const ProcessedCase& c : cases) {
        if (restrict && !restrict->count(c.id)) continue;
        index.insert(c.id, embedder.embed(render_case(c, false)));
    }
    stats.save(art.stats());
    index.save(art.index());
    std::cout << "indexed " << index.size() << " cases at dim " << config.embed_dim << "\n";
    record_manifest(art, config, "embed",
                    {{"index", "index.bin"}, {"stats", "stats.json"}, {"count", index.size()}});
    return kExitOk;
}

int run_build_kg(const EngineConfig& config, const Artifacts& art, const std::string& ids_path) {
    auto cases = load_processed(art.processed());
    std::set<CaseId> restrict;
    if (!ids_path.empty()) {
        restrict = load_ids(ids_path);
    } else {
        for (const auto& c : cases) restrict.insert(c.id);
    }
    GraphBuildReport build_report;
    auto kg = build_graph(cases, restrict, &build_report);
    kg.save(art.kg_triples(), art.kg_entities());

    auto minimums = check_min_precedents(kg, restrict, config.split.min_precedents);
    json report;
    report["entities"] = build_report.entity_count;
    report["triples"] = build_report.triple_count;
    report["dropped_edges"] = build_report.dropped.size();
    report["below_minimum"] = json::array();
    for (const auto& entry : minimums.below_minimum) {
        report["below_minimum"].push_back({{"id", entry.id}, {"count", entry.count}});
    }
    atomic_write_file(art.dir / "kg-report.json", report.dump(2));
    std::cout << "graph: " << build_report.entity_count << " entities, "
              << build_report.triple_count << " triples, " << build_report.dropped.size()
              << " dropped edges, " << minimums.below_minimum.size() << " below minimum\n";
    record_manifest(art, config, "build-kg",
                    {{"triples", "kg-triples.jsonl"},
                     {"entities", "kg-entities.json"},
                     {"report", "kg-report.json"}});
    return kExitOk;
}

int run_split(const EngineConfig& config, const Artifacts& art) {
    auto cases = load_processed(art.processed());
    auto result = split_corpus(cases, config.split);
    write_ids(art.train_ids(), result.train);
    write_ids(art.test_ids(), result.test);
    json report;
    report["eligible"] = result.report.eligible;
    report["train"] = result.report.train_count;
    report["test"] = result.report.test_count;
    report["per_class_quota"] = result.report.per_class_quota;
    report["spillover"] = result.report.spillover;
    report["discarded"] = json::array();
    for (const auto& d : result.report.discarded) {
        report["discarded"].push_back({{"id", d.id}, {"reason", d.reason}});
    }
    atomic_write_file(art.dir / "split-report.json", report.dump(2));
    std::cout << "split: " << result.train.size() << " train / " << result.test.size()
              << " test (quota " << result.report.per_class_quota << " per class, "
              << result.report.discarded.size() << " discarded)\n";
    record_manifest(art, config, "split",
                    {{"train", "train.txt"}, {"test", "test.txt"}, {"report", "split-report.json"}});
    return kExitOk;
}

int run_gen_train(const EngineConfig& config, const Artifacts& art) {
    auto state = load_state(art, config);
    CachingEmbeddingProvider provider(state.embedder);

    std::vector<PromptInstance> scr, pcr, ljp;
    for (const CaseId& id : state.train) {
        const ProcessedCase& c = state.store.at(id);
        std::uint64_t seed = derive_seed(config.seed, "train/" + id);
        scr.push_back(build_scr_instance(c, state.store, state.index, provider, Phase::Train, seed,
                                         config.choices));
        if (!state.kg.precedents_of(id).empty()) {
            pcr.push_back(build_pcr_instance(c, state.store, state.kg, state.index, provider,
                                             Phase::Train, 1, seed, config.choices));
            if (c.verdict != Verdict::Unsure) {
                auto inst = build_ljp_instance(c, state.store, state.kg, state.index, provider,
                                               LjpMode::FewShot, seed);
                inst.phase = Phase::Train;
                ljp.push_back(std::move(inst));
            }
        }
    }
    auto combined = assemble_combined(scr, pcr, ljp, derive_seed(config.seed, "combined"));
    for (auto& inst : combined) inst = enforce_token_budget(std::move(inst), config.token_budget);
    write_instances(art.train_set(), combined);
    std::cout << "combined training set: " << combined.size() << " instances (" << scr.size()
              << " similar-case, " << pcr.size() << " precedent, " << ljp.size()
              << " judgment)\n";
    record_manifest(art, config, "gen-train",
                    {{"train_set", "train.jsonl"},
                     {"scr", scr.size()},
                     {"pcr", pcr.size()},
                     {"ljp", ljp.size()}});
    return kExitOk;
}

int run_eval(const EngineConfig& config, const Artifacts& art, const std::string& task,
             const std::string& ljp_mode, std::size_t limit) {
    auto state = load_state(art, config);
    CachingEmbeddingProvider provider(state.embedder);
    std::vector<CaseId> test_ids(state.test.begin(), state.test.end());
    if (test_ids.empty()) throw Error("empty test manifest");
    std::size_t n = limit == 0 ? test_ids.size() : limit;

    std::vector<PromptInstance> instances;
    instances.reserve(n);
    static constexpr int pcr_ks[] = {1, 3, 5};
    for (std::size_t i = 0; i < n; ++i) {
        const ProcessedCase& input = state.store.at(test_ids[i % test_ids.size()]);
        std::uint64_t seed = derive_seed(config.seed, task + "/" + std::to_string(i));
        if (task == "scr") {
            instances.push_back(build_scr_instance(input, state.store, state.index, provider,
                                                   Phase::Test, seed, config.choices));
        } else if (task == "pcr") {
            instances.push_back(build_pcr_instance(input, state.store, state.kg, state.index,
                                                   provider, Phase::Test, pcr_ks[i % 3], seed,
                                                   config.choices));
        } else {
            LjpMode mode = ljp_mode == "few_shot" ? LjpMode::FewShot : LjpMode::ZeroShot;
            instances.push_back(build_ljp_instance(input, state.store, state.kg, state.index,
                                                   provider, mode, seed));
        }
    }
    for (auto& inst : instances) inst = enforce_token_budget(std::move(inst), config.token_budget);

    auto completions = complete_batch(instances, config.backend, config.jobs);
    std::size_t failed = 0;
    for (const auto& c : completions) failed += !c.ok();
    if (failed == completions.size()) {
        throw TransportError("all " + std::to_string(failed) + " completions failed; first: " +
                             *completions.front().error);
    }

    std::string report_path = "report-" + task + (task == "ljp" ? "-" + ljp_mode : "") + ".json";
    if (task == "ljp") {
        auto report = score_judgment(instances, completions);
        atomic_write_file(art.dir / report_path, judgment_report_json(report));
        std::cout << judgment_report_json(report) << "\n";
    } else {
        auto report = score_retrieval(instances, completions);
        atomic_write_file(art.dir / report_path, retrieval_report_json(report));
        std::cout << retrieval_table_text({report}, {task + " (test)"});
    }
    if (failed > 0) {
        std::cerr << failed << " of " << completions.size() << " completions failed\n";
    }
    record_manifest(art, config, "eval " + task, {{"report", report_path}, {"n", instances.size()}});
    return failed == 0 ? kExitOk : kExitTransport;
}

int run_sweep(const EngineConfig& config, const Artifacts& art, std::size_t n_per_size,
              bool csv_only) {
    auto state = load_state(art, config);
    CachingEmbeddingProvider provider(state.embedder);
    std::vector<CaseId> test_ids(state.test.begin(), state.test.end());

    SweepConfig sweep;
    sweep.n_per_size = n_per_size;
    sweep.seed = config.seed;
    sweep.parallelism = config.jobs;
    auto rows = choice_size_sweep(state.store, test_ids, state.index, state.kg, provider,
                                  config.backend, sweep);
    atomic_write_file(art.dir / "sweep.csv", sweep_table_csv(rows));
    atomic_write_file(art.dir / "sweep.txt", sweep_table_text(rows));
    std::cout << (csv_only ? sweep_table_csv(rows) : sweep_table_text(rows));
    record_manifest(art, config, "sweep",
                    {{"csv", "sweep.csv"}, {"table", "sweep.txt"}, {"n_per_size", n_per_size}});
    return kExitOk;
}

int run_make_synthetic(const EngineConfig& config, const Artifacts& art, std::size_t n_cases,
                       std::size_t citations, double unsure_fraction, const std::string& out) {
    SyntheticConfig synth;
    synth.n_cases = n_cases;
    synth.seed = config.seed;
    synth.citations_per_case = citations;
    synth.unsure_fraction = unsure_fraction;
    auto cases = make_synthetic_corpus(synth);
    fs::path path = out.empty() ? art.dir / "synthetic.jsonl" : fs::path(out);
    write_corpus(path, cases);
    std::cout << "wrote " << cases.size() << " synthetic cases to " << path.string() << "\n";
    record_manifest(art, config, "make-synthetic",
                    {{"corpus", path.string()}, {"n_cases", n_cases}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Legal-case retrieval and judgment evaluation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    EngineConfig config;
    app.add_option("--config", config_path, "JSON config file; flags override its fields");

    // Scalar overrides, applied after the config file loads.
    std::optional<std::string> corpus_flag, output_flag, backend_flag, endpoint_flag, model_flag;
    std::optional<std::uint64_t> seed_flag, backend_seed_flag, split_seed_flag;
    std::optional<int> jobs_flag, choices_flag;
    std::optional<std::size_t> budget_flag, min_precedents_flag;
    std::optional<double> train_fraction_flag;
    // take_last so a repeated flag overrides, matching config-file semantics
    auto last = CLI::MultiOptionPolicy::TakeLast;
    app.add_option("--corpus", corpus_flag, "raw corpus JSONL path")->multi_option_policy(last);
    app.add_option("--output-dir", output_flag, "artifact directory")->multi_option_policy(last);
    app.add_option("--backend", backend_flag,
                   "backend kind: http|oracle|uniform_random|always_notfound|fixed")
        ->multi_option_policy(last);
    app.add_option("--endpoint", endpoint_flag, "http backend endpoint")
        ->multi_option_policy(last);
    app.add_option("--model", model_flag, "http backend model name")->multi_option_policy(last);
    app.add_option("--seed", seed_flag, "master seed")->multi_option_policy(last);
    app.add_option("--backend-seed", backend_seed_flag, "mock backend seed")
        ->multi_option_policy(last);
    app.add_option("--split-seed", split_seed_flag, "split seed")->multi_option_policy(last);
    app.add_option("--jobs", jobs_flag, "worker parallelism")->multi_option_policy(last);
    app.add_option("--choices", choices_flag, "choice count, 6..11")->multi_option_policy(last);
    app.add_option("--token-budget", budget_flag, "prompt token budget")
        ->multi_option_policy(last);
    app.add_option("--min-precedents", min_precedents_flag, "split precedent minimum")
        ->multi_option_policy(last);
    app.add_option("--train-fraction", train_fraction_flag, "split train fraction")
        ->multi_option_policy(last);

    auto* ingest = app.add_subcommand("ingest", "parse and validate a raw corpus");
    std::string preprocess_mode = "extractive";
    std::size_t preprocess_sentences = 3;
    auto* preprocess = app.add_subcommand("preprocess", "summarize cases and extract verdicts");
    preprocess->add_option("--mode", preprocess_mode, "extractive|backend")
        ->check(CLI::IsMember({"extractive", "backend"}));
    preprocess->add_option("--sentences", preprocess_sentences,
                           "summary length for extractive mode");
    std::string embed_ids, kg_ids;
    auto* embed = app.add_subcommand("embed", "build and persist the vector index");
    embed->add_option("--ids", embed_ids, "restrict the index to ids in this manifest");
    auto* build_kg = app.add_subcommand("build-kg", "build the precedent graph");
    build_kg->add_option("--ids", kg_ids, "restrict edge targets to ids in this manifest");
    auto* split = app.add_subcommand("split", "emit constrained train/test manifests");
    auto* gen_train = app.add_subcommand("gen-train", "emit the combined training dataset");
    auto* eval = app.add_subcommand("eval", "build test instances, query the backend, score");
    std::string eval_task;
    std::string eval_mode = "zero_shot";
    std::size_t eval_limit = 0;
    eval->add_option("task", eval_task, "scr|pcr|ljp")
        ->required()
        ->check(CLI::IsMember({"scr", "pcr", "ljp"}));
    eval->add_option("--mode", eval_mode, "ljp mode: zero_shot|few_shot")
        ->check(CLI::IsMember({"zero_shot", "few_shot"}));
    eval->add_option("--n", eval_limit, "instance count (0 = one per test case)");
    auto* sweep = app.add_subcommand("sweep", "choice-count sweep over both retrieval tasks");
    std::size_t sweep_n = 1000;
    bool sweep_csv = false;
    sweep->add_option("--n-per-size", sweep_n, "instances per (task, size)");
    sweep->add_flag("--csv", sweep_csv, "print CSV instead of the text table");
    auto* make_synthetic = app.add_subcommand("make-synthetic", "deterministic fixture corpus");
    make_synthetic->group("");  // hidden
    std::size_t synth_cases = 400, synth_citations = 40;
    double synth_unsure = 0.0;
    std::string synth_out;
    make_synthetic->add_option("--n-cases", synth_cases, "corpus size");
    make_synthetic->add_option("--citations", synth_citations, "precedent density");
    make_synthetic->add_option("--unsure-fraction", synth_unsure, "share of undecided cases");
    make_synthetic->add_option("--out", synth_out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Collapse CLI11's many parse-error codes onto the documented
        // validation exit code; --help still exits 0.
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (!config_path.empty()) {
            config_from_json(json::parse(read_file(config_path)), config);
        }
        if (corpus_flag) config.corpus_path = *corpus_flag;
        if (output_flag) config.output_dir = *output_flag;
        if (backend_flag) config.backend.kind = backend_kind_from_name(*backend_flag);
        if (endpoint_flag) config.backend.endpoint = *endpoint_flag;
        if (model_flag) config.backend.model_name = *model_flag;
        if (seed_flag) config.seed = *seed_flag;
        if (backend_seed_flag) config.backend.seed = *backend_seed_flag;
        if (split_seed_flag) config.split.seed = *split_seed_flag;
        if (jobs_flag) config.jobs = *jobs_flag;
        if (choices_flag) config.choices = *choices_flag;
        if (budget_flag) config.token_budget = *budget_flag;
        if (min_precedents_flag) config.split.min_precedents = *min_precedents_flag;
        if (train_fraction_flag) config.split.train_fraction = *train_fraction_flag;
        config.validate();

        Artifacts art{config.output_dir};
        fs::create_directories(art.dir);

        if (ingest->parsed()) return run_ingest(config, art);
        if (preprocess->parsed()) {
            return run_preprocess(config, art, preprocess_mode, preprocess_sentences);
        }
        if (embed->parsed()) return run_embed(config, art, embed_ids);
        if (build_kg->parsed()) return run_build_kg(config, art, kg_ids);
        if (split->parsed()) return run_split(config, art);
        if (gen_train->parsed()) return run_gen_train(config, art);
        if (eval->parsed()) return run_eval(config, art, eval_task, eval_mode, eval_limit);
        if (sweep->parsed()) return run_sweep(config, art, sweep_n, sweep_csv);
        if (make_synthetic->parsed()) {
            return run_make_synthetic(config, art, synth_cases, synth_citations, synth_unsure,
                                      synth_out);
        }
        std::cerr << "no subcommand\n";
        return kExitError;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const TransportError& e) {
        std::cerr << "transport: " << e.what() << "\n";
        return kExitTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
