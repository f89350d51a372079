#include "casekit/eval.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "json.hpp"

#include "casekit/rng.hpp"

namespace casekit {

using nlohmann::json;

std::string normalize_title(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char ch : text) {
        unsigned char u = static_cast<unsigned char>(ch);
        if (std::isspace(u)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(u)));
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ',')) out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

namespace {

constexpr std::string_view kResponseMarker = "### Response:";

bool has_letter(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) != 0;
    });
}

// First line with any letter, with a leading "### Response:" marker dropped.
std::string answer_line(const std::string& response) {
    std::size_t pos = 0;
    while (pos <= response.size()) {
        auto end = response.find('\n', pos);
        if (end == std::string::npos) end = response.size();
        std::string_view line(response.data() + pos, end - pos);
        if (line.starts_with(kResponseMarker)) line.remove_prefix(kResponseMarker.size());
        if (has_letter(line)) return std::string(line);
        if (end == response.size()) break;
        pos = end + 1;
    }
    return {};
}

}  // namespace

MatchResult match_response(const std::string& response, const std::vector<Choice>& choices) {
    if (choices.empty()) throw Error("match_response: no choices");
    std::vector<std::string> titles(choices.size());
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        static constexpr std::string_view kLabel = "Case Title: ";
        std::string_view rendered = choices[i].rendered;
        auto end = rendered.find('\n');
        std::string_view first = rendered.substr(0, end);
        if (first.starts_with(kLabel)) first.remove_prefix(kLabel.size());
        titles[i] = normalize_title(first);
        if (!distinct.insert(titles[i]).second) {
            throw Error("match_response: duplicate normalized title '" + titles[i] + "'");
        }
    }

    MatchResult result;
    const std::string answer = normalize_title(answer_line(response));
    if (!answer.empty()) {
        for (std::size_t i = 0; i < titles.size(); ++i) {
            if (titles[i] == answer) {
                result.matched_position = choices[i].position;
                result.matched_case = choices[i].case_id;
                return result;
            }
        }
    }

    // Substring fallback: match only when exactly one title occurs.
    const std::string full = normalize_title(response);
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < titles.size(); ++i) {
        if (!titles[i].empty() && full.find(titles[i]) != std::string::npos) {
            if (found) {
                result.not_found = true;
                return result;
            }
            found = i;
        }
    }
    if (found) {
        result.matched_position = choices[*found].position;
        result.matched_case = choices[*found].case_id;
    } else {
        result.not_found = true;
    }
    return result;
}

RetrievalReport score_retrieval(const std::vector<PromptInstance>& instances,
                                const std::vector<Completion>& completions) {
    if (instances.size() != completions.size()) {
        throw Error("score_retrieval: " + std::to_string(instances.size()) + " instances vs " +
                    std::to_string(completions.size()) + " completions");
    }
    RetrievalReport report;
    report.n = instances.size();
    if (instances.empty()) return report;
    report.task = instances.front().task;

    static constexpr int ks[3] = {1, 3, 5};
    std::array<std::size_t, 3> hits{0, 0, 0};
    std::size_t not_found = 0;

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const PromptInstance& inst = instances[i];
        const Choice* matched = nullptr;
        if (completions[i].ok()) {
            MatchResult m = match_response(completions[i].text, inst.choices);
            if (m.matched_position) {
                for (const Choice& c : inst.choices) {
                    if (c.position == *m.matched_position) matched = &c;
                }
            } else {
                ++not_found;
            }
        } else {
            ++not_found;
        }

        if (report.task == Task::Pcr) {
            // Each PCR instance belongs to the top-k column matching its
            // number of planted ground truths.
            std::size_t truth_count = 0;
            for (const Choice& c : inst.choices) truth_count += c.is_ground_truth;
            for (std::size_t ki = 0; ki < 3; ++ki) {
                if (truth_count == static_cast<std::size_t>(ks[ki])) {
                    ++report.k_counts[ki];
                    if (matched && matched->is_ground_truth) ++hits[ki];
                }
            }
        } else {
            for (std::size_t ki = 0; ki < 3; ++ki) {
                ++report.k_counts[ki];
                if (matched && matched->truth_rank && *matched->truth_rank < ks[ki]) ++hits[ki];
            }
        }
    }

    auto rate = [&](std::size_t ki) {
        return report.k_counts[ki] == 0
                   ? 0.0
                   : static_cast<double>(hits[ki]) / static_cast<double>(report.k_counts[ki]);
    };
    report.top1 = rate(0);
    report.top3 = rate(1);
    report.top5 = rate(2);
    report.not_found_rate = static_cast<double>(not_found) / static_cast<double>(report.n);
    return report;
}

JudgmentReport score_judgment(const std::vector<PromptInstance>& instances,
                              const std::vector<Completion>& completions) {
    if (instances.size() != completions.size()) {
        throw Error("score_judgment: misaligned instance/completion lengths");
    }
    JudgmentReport report;
    report.n = instances.size();
    if (instances.empty()) return report;
    report.mode = instances.front().ljp_mode;

    auto class_index = [](Verdict v) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < kJudgmentClasses.size(); ++i) {
            if (kJudgmentClasses[i] == v) return i;
        }
        return std::nullopt;
    };

    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!instances[i].ljp_label) {
            throw Error("score_judgment: instance " + instances[i].input_case + " has no label");
        }
        auto truth = class_index(*instances[i].ljp_label);
        if (!truth) throw Error("score_judgment: Unsure label on " + instances[i].input_case);

        std::size_t predicted = kInvalidColumn;
        if (completions[i].ok()) {
            if (auto m = try_normalize_verdict(completions[i].text)) {
                if (auto idx = class_index(m->verdict)) predicted = *idx;
            }
        }
        ++report.confusion[*truth][predicted];
    }

    std::size_t correct = 0;
    for (std::size_t c = 0; c < 4; ++c) correct += report.confusion[c][c];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);

    double f1_sum = 0.0;
    std::size_t classes_present = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t truth_total = 0;
        for (std::size_t p = 0; p < 5; ++p) truth_total += report.confusion[c][p];
        if (truth_total == 0) continue;  // class absent from truth is skipped
        ++classes_present;
        std::size_t predicted_total = 0;
        for (std::size_t t = 0; t < 4; ++t) predicted_total += report.confusion[t][c];
        std::size_t tp = report.confusion[c][c];
        double precision = predicted_total == 0
                               ? 0.0
                               : static_cast<double>(tp) / static_cast<double>(predicted_total);
        double recall = static_cast<double>(tp) / static_cast<double>(truth_total);
        double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        f1_sum += f1;
    }
    report.macro_f1 = classes_present == 0 ? 0.0 : f1_sum / static_cast<double>(classes_present);
    return report;
}

std::optional<PrimaryFactor> parse_reason_factor(const std::string& response) {
    // Reasoning text: the line naming the precedent relation when present,
    // otherwise everything after the title line.
    std::string reasoning;
    std::size_t pos = 0;
    bool first_line = true;
    while (pos <= response.size()) {
        auto end = response.find('\n', pos);
        if (end == std::string::npos) end = response.size();
        std::string line = response.substr(pos, end - pos);
        if (line.find("precedent relation") != std::string::npos) {
            reasoning = line;
            break;
        }
        if (!first_line) reasoning += line + " ";
        first_line = false;
        if (end == response.size()) break;
        pos = end + 1;
    }
    std::string folded;
    for (char ch : reasoning) {
        folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    struct Rule {
        std::string_view keyword;
        PrimaryFactor factor;
    };
    static constexpr Rule rules[] = {
        {"detail", PrimaryFactor::CaseDetail}, {"court", PrimaryFactor::Judge},
        {"judge", PrimaryFactor::Judge},       {"plaintiff", PrimaryFactor::Plaintiffs},
        {"defendant", PrimaryFactor::Defendants}, {"date", PrimaryFactor::Date},
        {"title", PrimaryFactor::Title},
    };
    for (const Rule& r : rules) {
        if (folded.find(r.keyword) != std::string::npos) return r.factor;
    }
    return std::nullopt;
}

FactorDistribution factor_distribution(const std::vector<std::string>& responses) {
    FactorDistribution dist;
    dist.n = responses.size();
    if (responses.empty()) return dist;
    std::map<PrimaryFactor, std::size_t> counts;
    std::size_t unparsed = 0;
    for (const std::string& r : responses) {
        if (auto f = parse_reason_factor(r)) {
            ++counts[*f];
        } else {
            ++unparsed;
        }
    }
    for (PrimaryFactor f : kAllFactors) {
        dist.frequencies[f] =
            static_cast<double>(counts[f]) / static_cast<double>(responses.size());
    }
    dist.unparsed_rate = static_cast<double>(unparsed) / static_cast<double>(responses.size());
    return dist;
}

std::vector<SweepRow> choice_size_sweep(const CaseStore& store, const std::vector<CaseId>& test_ids,
                                        const VectorIndex& index, const KnowledgeGraph& kg,
                                        const EmbeddingProvider& provider,
                                        const BackendConfig& backend, const SweepConfig& config) {
    if (test_ids.empty()) throw Error("sweep: no test cases");
    std::vector<SweepRow> rows;
    static constexpr int pcr_ks[] = {1, 3, 5};
    for (Task task : {Task::Scr, Task::Pcr}) {
        for (int c : config.sizes) {
            SweepRow row;
            row.task = task;
            row.num_choices = c;
            std::vector<PromptInstance> instances;
            try {
                for (std::size_t i = 0; i < config.n_per_size; ++i) {
                    const ProcessedCase& input = store.at(test_ids[i % test_ids.size()]);
                    std::uint64_t seed = derive_seed(
                        config.seed, std::string(task_name(task)) + "/" + std::to_string(c) + "/" +
                                         std::to_string(i));
                    if (task == Task::Scr) {
                        instances.push_back(build_scr_instance(input, store, index, provider,
                                                               Phase::Test, seed, c));
                    } else {
                        instances.push_back(build_pcr_instance(input, store, kg, index, provider,
                                                               Phase::Test, pcr_ks[i % 3], seed,
                                                               c));
                    }
                }
            } catch (const Error& e) {
                row.skipped = true;
                row.skip_reason = e.what();
                rows.push_back(std::move(row));
                continue;
            }
            BackendConfig item_backend = backend;
            item_backend.seed = derive_seed(backend.seed, std::string(task_name(task)) + "/" +
                                                              std::to_string(c));
            auto completions = complete_batch(instances, item_backend, config.parallelism);
            row.report = score_retrieval(instances, completions);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {
json retrieval_to_json(const RetrievalReport& r) {
    json j;
    j["task"] = std::string(task_name(r.task));
    j["n"] = r.n;
    j["top1"] = r.top1;
    j["top3"] = r.top3;
    j["top5"] = r.top5;
    j["not_found"] = r.not_found_rate;
    j["k_counts"] = r.k_counts;
    return j;
}
}  // namespace

std::string retrieval_report_json(const RetrievalReport& report) {
    return retrieval_to_json(report).dump(2);
}

std::string judgment_report_json(const JudgmentReport& report) {
    json j;
    if (report.mode) j["mode"] = std::string(ljp_mode_name(*report.mode));
    j["n"] = report.n;
    j["accuracy"] = report.accuracy;
    j["macro_f1"] = report.macro_f1;
    json confusion = json::array();
    for (const auto& row : report.confusion) confusion.push_back(row);
    j["confusion"] = confusion;
    j["predicted_columns"] = {"Plaintiff Wins", "Defendant Wins", "Settlement", "Case Dismissal",
                              "Invalid"};
    return j.dump(2);
}

std::string factor_distribution_json(const FactorDistribution& dist) {
    json j;
    j["n"] = dist.n;
    j["unparsed_rate"] = dist.unparsed_rate;
    for (const auto& [f, freq] : dist.frequencies) {
        j["frequencies"][std::string(factor_name(f))] = freq;
    }
    return j.dump(2);
}

namespace {
std::string format_rate(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}
}  // namespace

std::string sweep_table_text(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "Method               top-1    top-3    top-5    Not Found\n";
    for (const SweepRow& row : rows) {
        std::string label = std::to_string(row.num_choices) + " Choices (" +
                            (row.task == Task::Scr ? "SCR" : "PCR") + ")";
        label.resize(21, ' ');
        out << label;
        if (row.skipped) {
            out << "skipped: " << row.skip_reason << '\n';
            continue;
        }
        out << format_rate(row.report.top1) << "    " << format_rate(row.report.top3) << "    "
            << format_rate(row.report.top5) << "    " << format_rate(row.report.not_found_rate)
            << '\n';
    }
    return out.str();
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "task,choices,skipped,top1,top3,top5,not_found,n\n";
    for (const SweepRow& row : rows) {
        out << task_name(row.task) << ',' << row.num_choices << ',' << (row.skipped ? 1 : 0) << ','
            << row.report.top1 << ',' << row.report.top3 << ',' << row.report.top5 << ','
            << row.report.not_found_rate << ',' << row.report.n << '\n';
    }
    return out.str();
}

std::string retrieval_table_text(const std::vector<RetrievalReport>& reports,
                                 const std::vector<std::string>& labels) {
    std::ostringstream out;
    out << "Method               top-1    top-3    top-5    Not Found\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string label = i < labels.size() ? labels[i] : std::string("report");
        label.resize(21, ' ');
        out << label << format_rate(reports[i].top1) << "    " << format_rate(reports[i].top3)
            << "    " << format_rate(reports[i].top5) << "    "
            << format_rate(reports[i].not_found_rate) << '\n';
    }
    return out.str();
}

}  // namespace casekit
