#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "casekit/types.hpp"

namespace casekit {

struct RecordError {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<RawCase> cases;
    std::vector<RecordError> errors;
};

struct ProcessedParseResult {
    std::vector<ProcessedCase> cases;
    std::vector<RecordError> errors;
};

// JSONL ingestion. Malformed lines are collected per-record; unreadable
// files and duplicate ids throw.
ParseResult parse_corpus(const std::filesystem::path& path);
ProcessedParseResult parse_processed_corpus(const std::filesystem::path& path);

std::string serialize_case(const RawCase& c);
std::string serialize_case(const ProcessedCase& c);
void write_corpus(const std::filesystem::path& path, const std::vector<RawCase>& cases);
void write_corpus(const std::filesystem::path& path, const std::vector<ProcessedCase>& cases);

// Step-1 prompt: the embedded template with the case description substituted.
std::string build_preprocess_prompt(const RawCase& raw);

struct PreprocessAnswer {
    std::string summary;
    Verdict verdict;
};

// Splits an "Answer 1: ... Answer 2: ..." response. Throws Error (carrying
// the raw response) when either marker is missing or the summary is empty.
PreprocessAnswer parse_preprocess_response(const std::string& response);

// Offline replacement for the LLM summarizer: first n_sentences of the
// case detail as the summary, verdict read from the sidecar field.
ProcessedCase extractive_preprocess(const RawCase& raw, std::size_t n_sentences = 3);

ProcessedCase make_processed(const RawCase& raw, std::string summary, Verdict verdict);

// Best-effort leak check: does the summary contain a verdict phrase verbatim?
bool summary_mentions_verdict(std::string_view summary);

// Deterministic prompt rendering matching the appendix choice-block layout.
std::string render_case(const ProcessedCase& c, bool include_verdict);

class CaseStore {
  public:
    CaseStore() = default;
    explicit CaseStore(std::vector<ProcessedCase> cases);

    void add(ProcessedCase c);
    const ProcessedCase& at(const CaseId& id) const;
    const ProcessedCase* find(const CaseId& id) const;
    std::size_t size() const { return cases_.size(); }
    const std::vector<ProcessedCase>& all() const { return cases_; }

  private:
    std::vector<ProcessedCase> cases_;
    std::unordered_map<CaseId, std::size_t> by_id_;
};

}  // namespace casekit
