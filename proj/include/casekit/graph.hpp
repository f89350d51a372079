#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "casekit/corpus.hpp"
#include "casekit/embedding.hpp"
#include "casekit/types.hpp"

namespace casekit {

// Directed precedent graph: (source, target) means source cites target.
class KnowledgeGraph {
  public:
    void add_entity(const CaseId& id) { entities_.insert(id); }
    void add_triple(const CaseId& source, const CaseId& target);

    const std::set<CaseId>& entities() const { return entities_; }
    const std::set<std::pair<CaseId, CaseId>>& triples() const { return triples_; }

    std::set<CaseId> precedents_of(const CaseId& id) const;
    std::size_t out_degree(const CaseId& id) const;

    void save(const std::filesystem::path& triples_path,
              const std::filesystem::path& entities_path) const;
    static KnowledgeGraph load(const std::filesystem::path& triples_path,
                               const std::filesystem::path& entities_path);

  private:
    std::set<CaseId> entities_;
    std::set<std::pair<CaseId, CaseId>> triples_;
    std::map<CaseId, std::set<CaseId>> adjacency_;
};

struct DroppedEdge {
    CaseId source;
    CaseId target;
};

struct GraphBuildReport {
    std::size_t entity_count = 0;
    std::size_t triple_count = 0;
    std::vector<DroppedEdge> dropped;  // edges pointing outside restrict_to
};

KnowledgeGraph build_graph(const std::vector<ProcessedCase>& cases,
                           const std::set<CaseId>& restrict_to, GraphBuildReport* report = nullptr);

struct FactorScores {
    std::map<PrimaryFactor, double> scores;
    PrimaryFactor primary = PrimaryFactor::CaseDetail;
    // Set when any factor text was empty on either side (that score is 0).
    bool empty_factor_warning = false;
};

// Cosine of the two factor texts' embeddings, clamped to [0, 1].
// Empty text on either side gives 0 and flips `warning` when supplied.
double feature_similarity(const ProcessedCase& a, const ProcessedCase& b, PrimaryFactor factor,
                          const EmbeddingProvider& provider, bool* warning = nullptr);

// All six feature similarities; primary = argmax, ties broken by
// CaseDetail > Judge > Defendants > Plaintiffs > Date > Title.
FactorScores primary_factor(const ProcessedCase& a, const ProcessedCase& b,
                            const EmbeddingProvider& provider);

struct MinPrecedentReport {
    struct Entry {
        CaseId id;
        std::size_t count;
    };
    std::vector<Entry> below_minimum;  // empty means pass
};

MinPrecedentReport check_min_precedents(const KnowledgeGraph& kg, const std::set<CaseId>& ids,
                                        std::size_t minimum);

// Optional validator: triples whose target case was not decided strictly
// before the source case. Not enforced at build time.
std::vector<DroppedEdge> find_date_order_violations(const KnowledgeGraph& kg,
                                                    const CaseStore& store);

}  // namespace casekit
