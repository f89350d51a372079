#pragma once

#include <set>
#include <string>
#include <vector>

#include "casekit/builder.hpp"
#include "casekit/corpus.hpp"
#include "casekit/embedding.hpp"
#include "casekit/graph.hpp"
#include "casekit/synthetic.hpp"

namespace casekit::testing {

inline ProcessedCase make_case(std::string id, std::string title, std::string summary,
                               Verdict verdict = Verdict::PlaintiffWin,
                               std::vector<CaseId> precedents = {}) {
    ProcessedCase c;
    c.id = std::move(id);
    c.title = std::move(title);
    c.date = "1850-01-14";
    c.judge = "Justice Harrow";
    c.plaintiffs = {"ABBOT"};
    c.defendants = {"BARNES"};
    c.case_summary = std::move(summary);
    c.verdict = verdict;
    c.precedent_ids = std::move(precedents);
    return c;
}

// Full desk pipeline fixture: synthetic corpus -> processed store, split,
// train-only index and graph.
struct Pipeline {
    CaseStore store;
    SplitResult split;
    HashedBowEmbedder embedder{512};
    VectorIndex index{512};
    KnowledgeGraph kg;
    std::vector<CaseId> test_ids;

    Pipeline(const SyntheticConfig& synth, const SplitConfig& split_config) {
        std::vector<ProcessedCase> processed;
        for (const RawCase& raw : make_synthetic_corpus(synth)) {
            processed.push_back(extractive_preprocess(raw));
        }
        split = split_corpus(processed, split_config);
        CorpusStats stats;
        for (const ProcessedCase& c : processed) {
            if (split.train.count(c.id)) stats.add_document(render_case(c, false));
        }
        embedder = HashedBowEmbedder(512, std::move(stats));
        index = VectorIndex(512);
        for (const ProcessedCase& c : processed) {
            if (split.train.count(c.id)) index.insert(c.id, embedder.embed(render_case(c, false)));
        }
        kg = build_graph(processed, split.train);
        store = CaseStore(std::move(processed));
        test_ids.assign(split.test.begin(), split.test.end());
    }
};

}  // namespace casekit::testing
