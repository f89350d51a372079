#include "casekit/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "casekit/io.hpp"
#include "casekit/rng.hpp"

namespace casekit {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            current.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

void CorpusStats::add_document(std::string_view text) {
    ++doc_count;
    std::map<std::string, bool> seen;
    for (auto& tok : tokenize(text)) {
        if (!seen.emplace(tok, true).second) continue;
        ++doc_frequency[tok];
    }
}

void CorpusStats::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["doc_count"] = doc_count;
    j["doc_frequency"] = doc_frequency;
    atomic_write_file(path, j.dump());
}

CorpusStats CorpusStats::load(const std::filesystem::path& path) {
    auto j = nlohmann::json::parse(read_file(path));
    CorpusStats s;
    s.doc_count = j.at("doc_count").get<std::uint64_t>();
    s.doc_frequency = j.at("doc_frequency").get<std::map<std::string, std::uint64_t>>();
    return s;
}

EmbeddingVector HashedBowEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw Error("embed: empty text");
    std::vector<double> weights(dim_, 0.0);
    std::map<std::string, std::uint64_t> tf;
    for (auto& tok : tokenize(text)) ++tf[tok];
    for (const auto& [tok, count] : tf) {
        double w = static_cast<double>(count);
        if (stats_) {
            std::uint64_t df = 1;
            if (auto it = stats_->doc_frequency.find(tok); it != stats_->doc_frequency.end()) {
                df = std::max<std::uint64_t>(it->second, 1);
            }
            w *= std::log(1.0 + static_cast<double>(stats_->doc_count) /
                                    static_cast<double>(df));
        }
        weights[fnv1a64(tok) % dim_] += w;
    }
    double norm = 0.0;
    for (double w : weights) norm += w * w;
    norm = std::sqrt(norm);
    EmbeddingVector out(dim_, 0.0f);
    if (norm > 0.0) {
        for (std::size_t i = 0; i < dim_; ++i) {
            out[i] = static_cast<float>(weights[i] / norm);
        }
    }
    return out;
}

EmbeddingVector CachingEmbeddingProvider::embed(std::string_view text) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(text); it != cache_.end()) return it->second;
    }
    EmbeddingVector v = inner_.embed(text);
    std::lock_guard lock(mutex_);
    cache_.emplace(std::string(text), v);
    return v;
}

void VectorIndex::insert(const CaseId& id, EmbeddingVector vector) {
    if (vector.size() != dim_) {
        throw Error("index_insert: dimension mismatch for " + id + ": got " +
                    std::to_string(vector.size()) + ", index dim " + std::to_string(dim_));
    }
    auto [it, inserted] = by_id_.emplace(id, entries_.size());
    if (!inserted) throw Error("index_insert: duplicate id " + id);
    entries_.push_back({id, std::move(vector)});
}

bool VectorIndex::contains(const CaseId& id) const { return by_id_.count(id) > 0; }

const EmbeddingVector* VectorIndex::find(const CaseId& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &entries_[it->second].vector;
}

std::vector<Neighbor> VectorIndex::top_k(const EmbeddingVector& query, std::size_t k,
                                         const std::optional<CaseId>& exclude) const {
    const std::size_t population = entries_.size() - (exclude && contains(*exclude) ? 1 : 0);
    if (k > population) {
        throw Error("top_k: k=" + std::to_string(k) + " exceeds population " +
                    std::to_string(population));
    }
    struct Scored {
        double similarity;
        const CaseId* id;
    };
    std::vector<Scored> scored;
    scored.reserve(entries_.size());
    for (const Entry& e : entries_) {
        if (exclude && e.id == *exclude) continue;
        scored.push_back({cosine(query, e.vector), &e.id});
    }
    auto better = [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return *a.id < *b.id;
    };
    if (k < scored.size()) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                          scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    const int start_rank = exclude ? 1 : 0;
    std::vector<Neighbor> out;
    out.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        out.push_back({*scored[i].id, start_rank + static_cast<int>(i), scored[i].similarity});
    }
    return out;
}

namespace {
constexpr char kMagic[4] = {'C', 'V', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw Error("index file truncated");
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}
}  // namespace

void VectorIndex::save(const std::filesystem::path& path) const {
    std::string buf;
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, kVersion);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(dim_));
    put<std::uint64_t>(buf, entries_.size());
    // by_id_ is ordered, so the file is independent of insertion order.
    for (const auto& [id, idx] : by_id_) {
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(id.size()));
        buf += id;
        for (float f : entries_[idx].vector) put<float>(buf, f);
    }
    atomic_write_file(path, buf);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::string buf = read_file(path);
    std::size_t pos = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw Error("not an index file: " + path.string());
    }
    pos = 4;
    if (get<std::uint32_t>(buf, pos) != kVersion) throw Error("unsupported index version");
    auto dim = get<std::uint32_t>(buf, pos);
    auto count = get<std::uint64_t>(buf, pos);
    VectorIndex index(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto len = get<std::uint32_t>(buf, pos);
        if (pos + len > buf.size()) throw Error("index file truncated");
        CaseId id = buf.substr(pos, len);
        pos += len;
        EmbeddingVector vec(dim);
        for (std::uint32_t d = 0; d < dim; ++d) vec[d] = get<float>(buf, pos);
        index.insert(id, std::move(vec));
    }
    return index;
}

}  // namespace casekit
