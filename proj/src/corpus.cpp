#include "casekit/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "casekit/io.hpp"
#include "casekit/templates.hpp"

namespace casekit {

using nlohmann::json;

namespace {

std::string replace_placeholder(std::string_view tpl, std::string_view placeholder,
                                std::string_view value) {
    std::string out(tpl);
    auto pos = out.find(placeholder);
    if (pos == std::string::npos) throw Error("template missing placeholder");
    out.replace(pos, placeholder.size(), value);
    return out;
}

std::vector<std::string> string_list(const json& j, const char* field) {
    std::vector<std::string> out;
    if (!j.contains(field)) return out;
    for (const auto& v : j.at(field)) out.push_back(v.get<std::string>());
    return out;
}

void validate_common(const std::string& id, const std::string& title, const std::string& date,
                     const std::vector<CaseId>& precedents) {
    if (id.empty()) throw Error("empty id");
    if (title.empty()) throw Error("empty title");
    if (!is_iso_date(date)) throw Error("date not ISO-8601: '" + date + "'");
    std::set<CaseId> seen;
    for (const auto& p : precedents) {
        if (p == id) throw Error("precedent self-reference");
        if (!seen.insert(p).second) throw Error("duplicate precedent id: " + p);
    }
}

RawCase raw_from_json(const json& j) {
    RawCase c;
    c.id = j.at("id").get<std::string>();
    c.title = j.at("title").get<std::string>();
    c.date = j.at("date").get<std::string>();
    c.judge = j.value("judge", std::string{});
    c.plaintiffs = string_list(j, "plaintiffs");
    c.plaintiff_attorneys = string_list(j, "plaintiff_attorneys");
    c.defendants = string_list(j, "defendants");
    c.defendant_attorneys = string_list(j, "defendant_attorneys");
    c.case_detail = j.at("case_detail").get<std::string>();
    c.precedent_ids = string_list(j, "precedent_ids");
    if (j.contains("verdict") && !j.at("verdict").is_null()) {
        c.sidecar_verdict = normalize_verdict(j.at("verdict").get<std::string>());
    }
    validate_common(c.id, c.title, c.date, c.precedent_ids);
    return c;
}

ProcessedCase processed_from_json(const json& j) {
    ProcessedCase c;
    c.id = j.at("id").get<std::string>();
    c.title = j.at("title").get<std::string>();
    c.date = j.at("date").get<std::string>();
    c.judge = j.value("judge", std::string{});
    c.plaintiffs = string_list(j, "plaintiffs");
    c.plaintiff_attorneys = string_list(j, "plaintiff_attorneys");
    c.defendants = string_list(j, "defendants");
    c.defendant_attorneys = string_list(j, "defendant_attorneys");
    c.case_summary = j.at("case_summary").get<std::string>();
    c.verdict = normalize_verdict(j.at("verdict").get<std::string>());
    c.precedent_ids = string_list(j, "precedent_ids");
    validate_common(c.id, c.title, c.date, c.precedent_ids);
    if (c.case_summary.empty()) throw Error("empty case_summary");
    return c;
}

json common_to_json(const auto& c) {
    json j;
    j["id"] = c.id;
    j["title"] = c.title;
    j["date"] = c.date;
    j["judge"] = c.judge;
    j["plaintiffs"] = c.plaintiffs;
    j["plaintiff_attorneys"] = c.plaintiff_attorneys;
    j["defendants"] = c.defendants;
    j["defendant_attorneys"] = c.defendant_attorneys;
    j["precedent_ids"] = c.precedent_ids;
    return j;
}

template <typename CaseT, typename FromJson>
auto parse_lines(const std::filesystem::path& path, FromJson from_json) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read corpus file: " + path.string());
    std::vector<CaseT> cases;
    std::vector<RecordError> errors;
    std::set<CaseId> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            CaseT c = from_json(json::parse(line));
            if (!ids.insert(c.id).second) {
                throw Error("duplicate case id '" + c.id + "' on line " + std::to_string(lineno));
            }
            cases.push_back(std::move(c));
        } catch (const Error& e) {
            if (std::string_view(e.what()).starts_with("duplicate case id")) throw;
            errors.push_back({lineno, e.what()});
        } catch (const std::exception& e) {
            errors.push_back({lineno, e.what()});
        }
    }
    return std::pair{std::move(cases), std::move(errors)};
}

}  // namespace

ParseResult parse_corpus(const std::filesystem::path& path) {
    auto [cases, errors] = parse_lines<RawCase>(path, raw_from_json);
    return {std::move(cases), std::move(errors)};
}

ProcessedParseResult parse_processed_corpus(const std::filesystem::path& path) {
    auto [cases, errors] = parse_lines<ProcessedCase>(path, processed_from_json);
    return {std::move(cases), std::move(errors)};
}

std::string serialize_case(const RawCase& c) {
    json j = common_to_json(c);
    j["case_detail"] = c.case_detail;
    if (c.sidecar_verdict) j["verdict"] = std::string(verdict_label(*c.sidecar_verdict));
    return j.dump();
}

std::string serialize_case(const ProcessedCase& c) {
    json j = common_to_json(c);
    j["case_summary"] = c.case_summary;
    j["verdict"] = std::string(verdict_label(c.verdict));
    return j.dump();
}

namespace {
template <typename CaseT>
void write_corpus_impl(const std::filesystem::path& path, const std::vector<CaseT>& cases) {
    std::string out;
    for (const auto& c : cases) {
        out += serialize_case(c);
        out += '\n';
    }
    atomic_write_file(path, out);
}
}  // namespace

void write_corpus(const std::filesystem::path& path, const std::vector<RawCase>& cases) {
    write_corpus_impl(path, cases);
}

void write_corpus(const std::filesystem::path& path, const std::vector<ProcessedCase>& cases) {
    write_corpus_impl(path, cases);
}

std::string build_preprocess_prompt(const RawCase& raw) {
    if (raw.case_detail.empty()) throw Error("build_preprocess_prompt: empty case_detail");
    return replace_placeholder(templates::kPreprocess, "{{CASE_DESCRIPTION}}", raw.case_detail);
}

PreprocessAnswer parse_preprocess_response(const std::string& response) {
    static constexpr std::string_view kA1 = "Answer 1:";
    static constexpr std::string_view kA2 = "Answer 2:";
    auto p1 = response.find(kA1);
    auto p2 = response.find(kA2);
    if (p1 == std::string::npos || p2 == std::string::npos || p2 < p1) {
        throw Error("preprocess response missing Answer markers: " + response);
    }
    auto trim = [](std::string s) {
        auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return std::string{};
        auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    };
    std::string summary = trim(response.substr(p1 + kA1.size(), p2 - p1 - kA1.size()));
    if (summary.empty()) throw Error("preprocess response has empty summary: " + response);
    Verdict v = normalize_verdict(response.substr(p2 + kA2.size()));
    return {std::move(summary), v};
}

bool summary_mentions_verdict(std::string_view summary) {
    std::string folded;
    folded.reserve(summary.size());
    for (char ch : summary) {
        folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    for (std::string_view phrase :
         {"plaintiff win", "defendant win", "plaintiff wins", "defendant wins", "settlement",
          "case dismissal"}) {
        if (folded.find(phrase) != std::string::npos) return true;
    }
    return false;
}

ProcessedCase make_processed(const RawCase& raw, std::string summary, Verdict verdict) {
    if (summary.empty()) throw Error("make_processed: empty summary for " + raw.id);
    ProcessedCase c;
    c.id = raw.id;
    c.title = raw.title;
    c.date = raw.date;
    c.judge = raw.judge;
    c.plaintiffs = raw.plaintiffs;
    c.plaintiff_attorneys = raw.plaintiff_attorneys;
    c.defendants = raw.defendants;
    c.defendant_attorneys = raw.defendant_attorneys;
    c.case_summary = std::move(summary);
    c.verdict = verdict;
    c.precedent_ids = raw.precedent_ids;
    return c;
}

ProcessedCase extractive_preprocess(const RawCase& raw, std::size_t n_sentences) {
    if (!raw.sidecar_verdict) {
        throw Error("extractive_preprocess: case " + raw.id + " has no sidecar verdict");
    }
    // First n sentences of the detail, sentence = up to and including '.'.
    std::string summary;
    std::size_t taken = 0;
    std::size_t pos = 0;
    while (taken < n_sentences && pos < raw.case_detail.size()) {
        auto dot = raw.case_detail.find('.', pos);
        if (dot == std::string::npos) {
            summary.append(raw.case_detail, pos, std::string::npos);
            pos = raw.case_detail.size();
        } else {
            summary.append(raw.case_detail, pos, dot - pos + 1);
            pos = dot + 1;
        }
        ++taken;
    }
    if (summary.empty()) summary = raw.case_detail;
    if (summary.empty()) throw Error("extractive_preprocess: empty case_detail for " + raw.id);
    return make_processed(raw, std::move(summary), *raw.sidecar_verdict);
}

std::string render_case(const ProcessedCase& c, bool include_verdict) {
    std::string out;
    out += "Case Title: " + c.title + "\n";
    out += "Date: " + c.date + "\n";
    out += "Judge: " + c.judge + "\n";
    out += "Plaintiffs: " + join_names(c.plaintiffs) + "\n";
    out += "Defendants: " + join_names(c.defendants) + "\n";
    out += "Case Detail: " + c.case_summary;
    if (include_verdict) {
        out += "\nVerdict: ";
        out += verdict_label(c.verdict);
    }
    return out;
}

CaseStore::CaseStore(std::vector<ProcessedCase> cases) {
    for (auto& c : cases) add(std::move(c));
}

void CaseStore::add(ProcessedCase c) {
    auto [it, inserted] = by_id_.emplace(c.id, cases_.size());
    if (!inserted) throw Error("duplicate case id in store: " + c.id);
    cases_.push_back(std::move(c));
}

const ProcessedCase* CaseStore::find(const CaseId& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &cases_[it->second];
}

const ProcessedCase& CaseStore::at(const CaseId& id) const {
    const ProcessedCase* c = find(id);
    if (!c) throw Error("unknown case id: " + id);
    return *c;
}

}  // namespace casekit
