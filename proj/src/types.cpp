#include "casekit/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace casekit {

std::string_view verdict_label(Verdict v) {
    switch (v) {
        case Verdict::PlaintiffWin: return "Plaintiff Wins";
        case Verdict::DefendantWin: return "Defendant Wins";
        case Verdict::Settlement: return "Settlement";
        case Verdict::CaseDismissal: return "Case Dismissal";
        case Verdict::Unsure: return "Unsure";
    }
    return "Unsure";
}

namespace {

std::string casefold_trim(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    auto first = out.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    auto last = out.find_last_not_of(" \t\r\n");
    return out.substr(first, last - first + 1);
}

}  // namespace

std::optional<VerdictMatch> try_normalize_verdict(std::string_view text) {
    const std::string folded = casefold_trim(text);
    struct Rule {
        std::string_view keyword;
        Verdict verdict;
    };
    // Precedence order resolves responses containing multiple keywords.
    static constexpr Rule rules[] = {
        {"plaintiff", Verdict::PlaintiffWin},
        {"defendant", Verdict::DefendantWin},
        {"settle", Verdict::Settlement},
        {"dismiss", Verdict::CaseDismissal},
        {"unsure", Verdict::Unsure},
    };
    std::optional<Verdict> first;
    int hits = 0;
    for (const Rule& r : rules) {
        if (folded.find(r.keyword) != std::string::npos) {
            if (!first) first = r.verdict;
            ++hits;
        }
    }
    if (!first) return std::nullopt;
    return VerdictMatch{*first, hits};
}

Verdict normalize_verdict(std::string_view text) {
    auto m = try_normalize_verdict(text);
    if (!m) throw Error("normalize_verdict: no verdict keyword in '" + std::string(text) + "'");
    return m->verdict;
}

std::string_view factor_name(PrimaryFactor f) {
    switch (f) {
        case PrimaryFactor::Title: return "Title";
        case PrimaryFactor::Date: return "Date";
        case PrimaryFactor::Judge: return "Judge";
        case PrimaryFactor::Plaintiffs: return "Plaintiffs";
        case PrimaryFactor::Defendants: return "Defendants";
        case PrimaryFactor::CaseDetail: return "CaseDetail";
    }
    return "CaseDetail";
}

PrimaryFactor factor_from_name(std::string_view name) {
    for (PrimaryFactor f : kAllFactors) {
        if (factor_name(f) == name) return f;
    }
    throw Error("unknown factor name: " + std::string(name));
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += "; ";
        out += names[i];
    }
    return out;
}

std::string factor_text(const ProcessedCase& c, PrimaryFactor f) {
    switch (f) {
        case PrimaryFactor::Title: return c.title;
        case PrimaryFactor::Date: return c.date;
        case PrimaryFactor::Judge: return c.judge;
        case PrimaryFactor::Plaintiffs: return join_names(c.plaintiffs);
        case PrimaryFactor::Defendants: return join_names(c.defendants);
        case PrimaryFactor::CaseDetail: return c.case_summary;
    }
    return {};
}

bool is_iso_date(std::string_view s) {
    // YYYY-MM-DD
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    auto digits = [&](std::size_t from, std::size_t n, int& out) {
        auto [ptr, ec] = std::from_chars(s.data() + from, s.data() + from + n, out);
        return ec == std::errc{} && ptr == s.data() + from + n;
    };
    int y = 0, m = 0, d = 0;
    if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return false;
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr int days[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return d <= days[m - 1];
}

}  // namespace casekit
