#include "casekit/graph.hpp"

#include <algorithm>

#include "json.hpp"

#include "casekit/io.hpp"

namespace casekit {

using nlohmann::json;

void KnowledgeGraph::add_triple(const CaseId& source, const CaseId& target) {
    if (source == target) throw Error("self-loop triple: " + source);
    entities_.insert(source);
    entities_.insert(target);
    if (triples_.emplace(source, target).second) {
        adjacency_[source].insert(target);
    }
}

std::set<CaseId> KnowledgeGraph::precedents_of(const CaseId& id) const {
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? std::set<CaseId>{} : it->second;
}

std::size_t KnowledgeGraph::out_degree(const CaseId& id) const {
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? 0 : it->second.size();
}

void KnowledgeGraph::save(const std::filesystem::path& triples_path,
                          const std::filesystem::path& entities_path) const {
    std::string triples;
    for (const auto& [source, target] : triples_) {
        json j;
        j["source"] = source;
        j["target"] = target;
        triples += j.dump();
        triples += '\n';
    }
    atomic_write_file(triples_path, triples);

    json manifest;
    manifest["entities"] = std::vector<CaseId>(entities_.begin(), entities_.end());
    atomic_write_file(entities_path, manifest.dump());
}

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& entities_path) {
    KnowledgeGraph kg;
    auto manifest = json::parse(read_file(entities_path));
    for (const auto& e : manifest.at("entities")) kg.add_entity(e.get<CaseId>());
    std::string content = read_file(triples_path);
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        auto j = json::parse(line);
        kg.add_triple(j.at("source").get<CaseId>(), j.at("target").get<CaseId>());
    }
    return kg;
}

KnowledgeGraph build_graph(const std::vector<ProcessedCase>& cases,
                           const std::set<CaseId>& restrict_to, GraphBuildReport* report) {
    KnowledgeGraph kg;
    for (const auto& c : cases) {
        // Only edge targets are restricted; a source outside the set still
        // keeps its surviving edges (e.g. test cases citing train cases).
        if (restrict_to.count(c.id)) kg.add_entity(c.id);
        for (const auto& p : c.precedent_ids) {
            if (restrict_to.count(p)) {
                kg.add_triple(c.id, p);
            } else if (report) {
                report->dropped.push_back({c.id, p});
            }
        }
    }
    if (report) {
        report->entity_count = kg.entities().size();
        report->triple_count = kg.triples().size();
    }
    return kg;
}

double feature_similarity(const ProcessedCase& a, const ProcessedCase& b, PrimaryFactor factor,
                          const EmbeddingProvider& provider, bool* warning) {
    const std::string ta = factor_text(a, factor);
    const std::string tb = factor_text(b, factor);
    if (ta.empty() || tb.empty()) {
        if (warning) *warning = true;
        return 0.0;
    }
    double sim = cosine(provider.embed(ta), provider.embed(tb));
    return std::clamp(sim, 0.0, 1.0);
}

FactorScores primary_factor(const ProcessedCase& a, const ProcessedCase& b,
                            const EmbeddingProvider& provider) {
    FactorScores result;
    for (PrimaryFactor f : kAllFactors) {
        result.scores[f] =
            feature_similarity(a, b, f, provider, &result.empty_factor_warning);
    }
    // Tie-break precedence, highest priority first.
    static constexpr PrimaryFactor precedence[] = {
        PrimaryFactor::CaseDetail, PrimaryFactor::Judge, PrimaryFactor::Defendants,
        PrimaryFactor::Plaintiffs, PrimaryFactor::Date,  PrimaryFactor::Title,
    };
    PrimaryFactor best = PrimaryFactor::CaseDetail;
    double best_score = -1.0;
    for (PrimaryFactor f : precedence) {
        if (result.scores[f] > best_score) {
            best_score = result.scores[f];
            best = f;
        }
    }
    result.primary = best;
    return result;
}

MinPrecedentReport check_min_precedents(const KnowledgeGraph& kg, const std::set<CaseId>& ids,
                                        std::size_t minimum) {
    MinPrecedentReport report;
    for (const auto& id : ids) {
        std::size_t degree = kg.out_degree(id);
        if (degree < minimum) report.below_minimum.push_back({id, degree});
    }
    return report;
}

std::vector<DroppedEdge> find_date_order_violations(const KnowledgeGraph& kg,
                                                    const CaseStore& store) {
    std::vector<DroppedEdge> violations;
    for (const auto& [source, target] : kg.triples()) {
        const ProcessedCase* s = store.find(source);
        const ProcessedCase* t = store.find(target);
        if (!s || !t) continue;
        if (!(t->date < s->date)) violations.push_back({source, target});
    }
    return violations;
}

}  // namespace casekit
