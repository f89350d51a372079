#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "casekit/types.hpp"

namespace casekit {

// Deterministic desk-scale corpus generator used by tests and the hidden
// make-synthetic subcommand.
struct SyntheticConfig {
    std::size_t n_cases = 400;
    std::uint64_t seed = 0;
    // Citations drawn from earlier cases, so the precedent graph is acyclic.
    std::size_t citations_per_case = 40;
    double unsure_fraction = 0.0;
    // Intended primary factor for each case's first precedent pair; the
    // generator copies that feature text from the precedent and perturbs the
    // short fields it did not plant.
    std::map<PrimaryFactor, double> factor_mixture = {
        {PrimaryFactor::CaseDetail, 0.783}, {PrimaryFactor::Judge, 0.149},
        {PrimaryFactor::Defendants, 0.041}, {PrimaryFactor::Plaintiffs, 0.027},
        {PrimaryFactor::Date, 0.0},         {PrimaryFactor::Title, 0.0},
    };
};

std::vector<RawCase> make_synthetic_corpus(const SyntheticConfig& config);

// The factor the generator planted for (case, first precedent), index-aligned
// with the returned corpus; entries without a planted pair are absent.
struct SyntheticCorpus {
    std::vector<RawCase> cases;
    std::map<CaseId, PrimaryFactor> planted_factor;
};

SyntheticCorpus make_synthetic_corpus_with_plants(const SyntheticConfig& config);

}  // namespace casekit
