#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "casekit/corpus.hpp"
#include "casekit/embedding.hpp"
#include "casekit/graph.hpp"
#include "casekit/types.hpp"

namespace casekit {

// Constraint violations that no retry can fix (exit code 3 at the CLI).
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

enum class Task { Scr, Pcr, Ljp };
enum class Phase { Train, Test };
enum class LjpMode { ZeroShot, FewShot };

std::string_view task_name(Task t);
std::string_view phase_name(Phase p);
std::string_view ljp_mode_name(LjpMode m);

struct SplitConfig {
    double train_fraction = 0.5;
    std::size_t min_precedents = 5;
    std::uint64_t seed = 0;
    bool balance_classes = true;
};

struct SplitReport {
    struct Discard {
        CaseId id;
        std::string reason;
    };
    std::size_t eligible = 0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t per_class_quota = 0;
    std::vector<Discard> discarded;
    // Balanced-out surplus, usable as SCR/PCR material but not emitted in
    // either manifest.
    std::vector<CaseId> spillover;
};

struct SplitResult {
    std::set<CaseId> train;
    std::set<CaseId> test;
    SplitReport report;
};

// Enforces the three split constraints: every kept case has at least
// min_precedents precedents, every test case has at least min_precedents of
// them inside train, and the train verdict histogram is exactly balanced
// across the four decided outcomes.
SplitResult split_corpus(const std::vector<ProcessedCase>& cases, const SplitConfig& config);

struct Choice {
    int position = 0;  // 1..C
    CaseId case_id;
    std::string rendered;
    bool is_ground_truth = false;
    std::optional<int> truth_rank;
};

struct PromptInstance {
    Task task = Task::Scr;
    Phase phase = Phase::Train;
    CaseId input_case;
    std::string instruction_text;  // fully rendered prompt
    std::string input_rendered;
    std::vector<Choice> choices;  // empty for LJP
    std::optional<Verdict> ljp_label;
    std::optional<LjpMode> ljp_mode;
    std::optional<CaseId> icl_similar;
    std::optional<CaseId> icl_precedent;
    std::string icl_similar_rendered;
    std::string icl_precedent_rendered;
    std::string expected_output;
    std::uint64_t permutation_seed = 0;
    std::size_t token_estimate = 0;
    std::vector<int> truncated_choices;  // positions trimmed by the token budget
};

// ceil(chars / 4); the conservative stand-in for model tokens.
std::size_t estimate_tokens(std::string_view text);

// Rebuilds instruction_text and token_estimate from the instance parts.
void render_prompt(PromptInstance& instance);

std::string canonical_reason(PrimaryFactor factor);

PromptInstance build_scr_instance(const ProcessedCase& input, const CaseStore& store,
                                  const VectorIndex& index, const EmbeddingProvider& provider,
                                  Phase phase, std::uint64_t seed, int num_choices = 10);

PromptInstance build_pcr_instance(const ProcessedCase& input, const CaseStore& store,
                                  const KnowledgeGraph& kg, const VectorIndex& index,
                                  const EmbeddingProvider& provider, Phase phase, int k,
                                  std::uint64_t seed, int num_choices = 10);

PromptInstance build_ljp_instance(const ProcessedCase& input, const CaseStore& store,
                                  const KnowledgeGraph& kg, const VectorIndex& index,
                                  const EmbeddingProvider& provider, LjpMode mode,
                                  std::uint64_t seed);

// Concatenate train-phase instances and shuffle with the given seed.
std::vector<PromptInstance> assemble_combined(const std::vector<PromptInstance>& scr,
                                              const std::vector<PromptInstance>& pcr,
                                              const std::vector<PromptInstance>& ljp,
                                              std::uint64_t seed);

// Trims choice Case Detail sections (longest first) until the estimate fits.
PromptInstance enforce_token_budget(PromptInstance instance, std::size_t budget_tokens);

std::string serialize_instance(const PromptInstance& instance);
PromptInstance parse_instance(const std::string& line);
void write_instances(const std::filesystem::path& path,
                     const std::vector<PromptInstance>& instances);
std::vector<PromptInstance> read_instances(const std::filesystem::path& path);

}  // namespace casekit
