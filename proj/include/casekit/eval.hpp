#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "casekit/backend.hpp"
#include "casekit/builder.hpp"
#include "casekit/graph.hpp"

namespace casekit {

// Casefold, trim, strip trailing '.'/',' and collapse whitespace runs, so
// "BISHOP v. STEWART." matches the choice title "BISHOP v. STEWART".
std::string normalize_title(std::string_view text);

struct MatchResult {
    std::optional<int> matched_position;
    std::optional<CaseId> matched_case;
    bool not_found = false;
};

// Exact match on the first answer line, then a single-occurrence substring
// fallback over the whole response; ambiguity is conservatively not-found.
MatchResult match_response(const std::string& response, const std::vector<Choice>& choices);

struct RetrievalReport {
    Task task = Task::Scr;
    std::size_t n = 0;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;
    double not_found_rate = 0.0;
    // Denominators per top-k column (they differ for PCR, where each k has
    // its own instance set).
    std::array<std::size_t, 3> k_counts{0, 0, 0};
};

RetrievalReport score_retrieval(const std::vector<PromptInstance>& instances,
                                const std::vector<Completion>& completions);

inline constexpr std::array<Verdict, 4> kJudgmentClasses = {
    Verdict::PlaintiffWin, Verdict::DefendantWin, Verdict::Settlement, Verdict::CaseDismissal};
inline constexpr std::size_t kInvalidColumn = 4;

struct JudgmentReport {
    std::optional<LjpMode> mode;
    std::size_t n = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    // true class (4) x predicted class (4 + Invalid)
    std::array<std::array<std::size_t, 5>, 4> confusion{};
};

JudgmentReport score_judgment(const std::vector<PromptInstance>& instances,
                              const std::vector<Completion>& completions);

struct FactorDistribution {
    std::map<PrimaryFactor, double> frequencies;
    double unparsed_rate = 0.0;
    std::size_t n = 0;
};

// Maps PCR reasoning lines back to factors by keyword; court-themed
// reasons count toward Judge.
std::optional<PrimaryFactor> parse_reason_factor(const std::string& response);
FactorDistribution factor_distribution(const std::vector<std::string>& responses);

struct SweepRow {
    Task task = Task::Scr;
    int num_choices = 0;
    bool skipped = false;
    std::string skip_reason;
    RetrievalReport report;
};

struct SweepConfig {
    std::vector<int> sizes = {6, 7, 8, 9, 10, 11};
    std::size_t n_per_size = 1000;
    std::uint64_t seed = 0;
    int parallelism = 1;
};

std::vector<SweepRow> choice_size_sweep(const CaseStore& store, const std::vector<CaseId>& test_ids,
                                        const VectorIndex& index, const KnowledgeGraph& kg,
                                        const EmbeddingProvider& provider,
                                        const BackendConfig& backend, const SweepConfig& config);

// Report rendering: JSON blob, aligned-column text table, CSV line set.
std::string retrieval_report_json(const RetrievalReport& report);
std::string judgment_report_json(const JudgmentReport& report);
std::string factor_distribution_json(const FactorDistribution& dist);
std::string sweep_table_text(const std::vector<SweepRow>& rows);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);
std::string retrieval_table_text(const std::vector<RetrievalReport>& reports,
                                 const std::vector<std::string>& labels);

}  // namespace casekit
