#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace casekit {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using CaseId = std::string;

enum class Verdict {
    PlaintiffWin,
    DefendantWin,
    Settlement,
    CaseDismissal,
    Unsure,
};

// Canonical label as used in prompts and expected outputs.
std::string_view verdict_label(Verdict v);

// Keyword mapping: plaintiff > defendant > settle > dismiss > unsure.
// Throws Error when no keyword matches; never silently returns Unsure.
Verdict normalize_verdict(std::string_view text);

// Same mapping, but reports how many distinct keywords matched so callers
// can flag ambiguous responses for review.
struct VerdictMatch {
    Verdict verdict;
    int keyword_hits;
};
std::optional<VerdictMatch> try_normalize_verdict(std::string_view text);

struct RawCase {
    CaseId id;
    std::string title;
    std::string date;  // ISO-8601, validated at parse time
    std::string judge;
    std::vector<std::string> plaintiffs;
    std::vector<std::string> plaintiff_attorneys;
    std::vector<std::string> defendants;
    std::vector<std::string> defendant_attorneys;
    std::string case_detail;
    std::vector<CaseId> precedent_ids;
    // Sidecar verdict used by the offline extractive preprocessor.
    std::optional<Verdict> sidecar_verdict;
};

struct ProcessedCase {
    CaseId id;
    std::string title;
    std::string date;
    std::string judge;
    std::vector<std::string> plaintiffs;
    std::vector<std::string> plaintiff_attorneys;
    std::vector<std::string> defendants;
    std::vector<std::string> defendant_attorneys;
    std::string case_summary;
    Verdict verdict = Verdict::Unsure;
    std::vector<CaseId> precedent_ids;
};

enum class PrimaryFactor {
    Title,
    Date,
    Judge,
    Plaintiffs,
    Defendants,
    CaseDetail,
};

inline constexpr std::array<PrimaryFactor, 6> kAllFactors = {
    PrimaryFactor::Title,      PrimaryFactor::Date,       PrimaryFactor::Judge,
    PrimaryFactor::Plaintiffs, PrimaryFactor::Defendants, PrimaryFactor::CaseDetail,
};

std::string_view factor_name(PrimaryFactor f);
PrimaryFactor factor_from_name(std::string_view name);

// "name1; name2" party-list rendering used in prompts and factor texts.
std::string join_names(const std::vector<std::string>& names);

// Text of one case feature as fed to the feature-similarity embedding.
std::string factor_text(const ProcessedCase& c, PrimaryFactor f);

bool is_iso_date(std::string_view s);

}  // namespace casekit
