#include "casekit/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "casekit/rng.hpp"

namespace casekit {

namespace {

constexpr std::array kSurnames = {
    "ABBOT",    "BARNES",   "CALHOUN", "DAWSON",  "ELDRIDGE", "FAIRBANK", "GRANGER",
    "HOLLOWAY", "INGRAM",   "JARVIS",  "KEATING", "LOCKWOOD", "MERCER",   "NORWOOD",
    "OSBORNE",  "PRESCOTT", "QUIMBY",  "RAMSEY",  "SHELTON",  "THATCHER", "UPSHAW",
    "VANCE",    "WHITFIELD", "YATES",  "ZIEGLER", "BECKETT",  "CROSBY",   "DELANEY",
    "EASTMAN",  "FOLSOM",   "GRIMES",  "HASTINGS", "IRVING",  "JUDSON",   "KIMBALL",
    "LANDON",   "MAYHEW",   "NICHOLS", "OAKLEY",  "PAXTON",
};

constexpr std::array kJudges = {
    "Justice Harrow", "Justice Pemberton", "Justice Calloway", "Justice Winfield",
    "Justice Drummond", "Justice Atherton", "Justice Beaumont", "Justice Crane",
    "Justice Standish", "Justice Mallory", "Justice Redfield", "Justice Torrance",
};

struct Topic {
    const char* name;
    std::array<const char*, 14> words;
};

constexpr std::array<Topic, 6> kTopics = {{
    {"property",
     {"deed", "parcel", "boundary", "easement", "survey", "conveyance", "grantor", "acreage",
      "ejectment", "possession", "recording", "plat", "encumbrance", "tract"}},
    {"patent",
     {"patent", "infringement", "specification", "invention", "claims", "novelty", "licensing",
      "apparatus", "reissue", "assignee", "prosecution", "embodiment", "royalty", "artisan"}},
    {"contract",
     {"contract", "breach", "consideration", "performance", "covenant", "damages", "tender",
      "rescission", "obligation", "warranty", "payment", "installment", "forfeiture", "clause"}},
    {"habeas",
     {"habeas", "custody", "enlistment", "petitioner", "detention", "discharge", "warrant",
      "remand", "minor", "consent", "confinement", "jailer", "writ", "release"}},
    {"maritime",
     {"vessel", "cargo", "admiralty", "salvage", "charter", "harbor", "freight", "mariner",
      "collision", "demurrage", "voyage", "tonnage", "manifest", "anchorage"}},
    {"tax",
     {"assessment", "levy", "collector", "exemption", "revenue", "taxpayer", "valuation",
      "delinquency", "auction", "statute", "refund", "penalty", "appraisal", "treasury"}},
}};

constexpr std::array kConnectives = {
    "the", "court", "considered", "whether", "record", "shows", "parties", "disputed",
    "evidence", "established", "ruling", "turned", "upon", "question", "presented",
};

std::string make_detail(SplitMix64& rng, std::size_t topic_index, std::size_t sentences) {
    const Topic& topic = kTopics[topic_index];
    std::string detail;
    for (std::size_t s = 0; s < sentences; ++s) {
        std::size_t words = 8 + rng.below(6);
        std::string sentence;
        for (std::size_t w = 0; w < words; ++w) {
            if (!sentence.empty()) sentence += ' ';
            if (rng.below(2) == 0) {
                sentence += topic.words[rng.below(topic.words.size())];
            } else {
                sentence += kConnectives[rng.below(kConnectives.size())];
            }
        }
        if (!detail.empty()) detail += ' ';
        detail += sentence + ".";
    }
    return detail;
}

std::string make_date(std::size_t index) {
    // Monotone in index so precedent edges mostly point backwards in time.
    int year = 1800 + static_cast<int>(index / 12);
    int month = 1 + static_cast<int>(index % 12);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, 14);
    return buf;
}

std::vector<std::string> make_parties(SplitMix64& rng) {
    std::vector<std::string> names;
    std::size_t count = 1 + rng.below(2);
    for (std::size_t i = 0; i < count; ++i) {
        std::string name = kSurnames[rng.below(kSurnames.size())];
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
    return names;
}

PrimaryFactor draw_factor(SplitMix64& rng, const std::map<PrimaryFactor, double>& mixture) {
    double total = 0.0;
    for (const auto& [f, w] : mixture) total += w;
    double draw = rng.unit() * total;
    for (const auto& [f, w] : mixture) {
        draw -= w;
        if (draw <= 0.0) return f;
    }
    return PrimaryFactor::CaseDetail;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus_with_plants(const SyntheticConfig& config) {
    SyntheticCorpus corpus;
    corpus.cases.reserve(config.n_cases);
    for (std::size_t i = 0; i < config.n_cases; ++i) {
        SplitMix64 rng(derive_seed(config.seed, i));
        RawCase c;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "case-%05zu", i);
        c.id = idbuf;
        c.date = make_date(i);
        c.judge = kJudges[rng.below(kJudges.size())];
        c.plaintiffs = make_parties(rng);
        c.defendants = make_parties(rng);
        c.plaintiff_attorneys = {std::string(kSurnames[rng.below(kSurnames.size())]) + ", Esq."};
        c.defendant_attorneys = {std::string(kSurnames[rng.below(kSurnames.size())]) + ", Esq."};
        c.title = c.plaintiffs.front() + std::string(" v. ") + c.defendants.front() + " No. " +
                  std::to_string(i + 1);
        c.case_detail = make_detail(rng, rng.below(kTopics.size()), 5 + rng.below(4));

        if (config.unsure_fraction > 0.0 && rng.unit() < config.unsure_fraction) {
            c.sidecar_verdict = Verdict::Unsure;
        } else {
            static constexpr Verdict cycle[] = {Verdict::PlaintiffWin, Verdict::DefendantWin,
                                                Verdict::Settlement, Verdict::CaseDismissal};
            c.sidecar_verdict = cycle[i % 4];
        }

        std::size_t citations = std::min(config.citations_per_case, i);
        if (citations > 0) {
            for (std::size_t idx : sample_without_replacement(i, citations, rng.next())) {
                c.precedent_ids.push_back(corpus.cases[idx].id);
            }
            // Plant the intended primary factor against the first precedent:
            // copy that feature text and steer the other short fields away
            // from accidental ties.
            const RawCase& first = *std::find_if(
                corpus.cases.begin(), corpus.cases.end(),
                [&](const RawCase& rc) { return rc.id == c.precedent_ids.front(); });
            PrimaryFactor factor = draw_factor(rng, config.factor_mixture);
            switch (factor) {
                case PrimaryFactor::CaseDetail:
                    c.case_detail = first.case_detail;
                    break;
                case PrimaryFactor::Judge:
                    c.judge = first.judge;
                    break;
                case PrimaryFactor::Plaintiffs:
                    c.plaintiffs = first.plaintiffs;
                    break;
                case PrimaryFactor::Defendants:
                    c.defendants = first.defendants;
                    break;
                case PrimaryFactor::Date:
                case PrimaryFactor::Title:
                    break;  // never planted: dates are monotone, titles unique
            }
            if (factor != PrimaryFactor::Judge && c.judge == first.judge) {
                auto pos = std::find(kJudges.begin(), kJudges.end(), c.judge) - kJudges.begin();
                c.judge = kJudges[(static_cast<std::size_t>(pos) + 1) % kJudges.size()];
            }
            corpus.planted_factor[c.id] = factor;
        }
        corpus.cases.push_back(std::move(c));
    }
    return corpus;
}

std::vector<RawCase> make_synthetic_corpus(const SyntheticConfig& config) {
    return make_synthetic_corpus_with_plants(config).cases;
}

}  // namespace casekit
