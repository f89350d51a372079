#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "casekit/types.hpp"

namespace casekit {

using EmbeddingVector = std::vector<float>;

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    // Unit-L2-norm vector; throws on empty text.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dim() const = 0;
};

// Document-frequency table for the fallback embedder. Tokens are the
// casefolded alphanumeric runs of each document.
struct CorpusStats {
    std::uint64_t doc_count = 0;
    std::map<std::string, std::uint64_t> doc_frequency;

    void add_document(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static CorpusStats load(const std::filesystem::path& path);
};

std::vector<std::string> tokenize(std::string_view text);

// Deterministic hashed bag-of-words embedder: each token hashed into one of
// `dim` buckets, weighted by tf (or tf-idf when stats are attached), then
// L2-normalized.
class HashedBowEmbedder : public EmbeddingProvider {
  public:
    explicit HashedBowEmbedder(std::size_t dim = 512) : dim_(dim) {}
    HashedBowEmbedder(std::size_t dim, CorpusStats stats)
        : dim_(dim), stats_(std::move(stats)) {}

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dim() const override { return dim_; }
    const std::optional<CorpusStats>& stats() const { return stats_; }

  private:
    std::size_t dim_;
    std::optional<CorpusStats> stats_;
};

// Memoizing decorator; safe for concurrent readers.
class CachingEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit CachingEmbeddingProvider(const EmbeddingProvider& inner) : inner_(inner) {}

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dim() const override { return inner_.dim(); }

  private:
    const EmbeddingProvider& inner_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, EmbeddingVector, std::less<>> cache_;
};

struct Neighbor {
    CaseId id;
    int rank = 0;
    double similarity = 0.0;

    bool operator==(const Neighbor&) const = default;
};

// Exact exhaustive cosine index. Build phase is exclusive-writer; queries
// are const and safe for concurrent readers.
class VectorIndex {
  public:
    explicit VectorIndex(std::size_t dim) : dim_(dim) {}

    void insert(const CaseId& id, EmbeddingVector vector);
    std::size_t size() const { return entries_.size(); }
    std::size_t dim() const { return dim_; }
    bool contains(const CaseId& id) const;
    const EmbeddingVector* find(const CaseId& id) const;

    // Descending cosine, ties broken by ascending id. With an exclusion the
    // returned ranks start at 1, otherwise at 0.
    std::vector<Neighbor> top_k(const EmbeddingVector& query, std::size_t k,
                                const std::optional<CaseId>& exclude = std::nullopt) const;

    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

  private:
    struct Entry {
        CaseId id;
        EmbeddingVector vector;
    };
    std::size_t dim_;
    std::vector<Entry> entries_;
    std::map<CaseId, std::size_t> by_id_;
};

}  // namespace casekit
