#pragma once
// Dense vectors for glosses, morphemes, and whole candidates, behind a
// pluggable provider. Exact cosine kNN over morpheme vectors.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "morphorank/common.hpp"
#include "morphorank/lexicon.hpp"

namespace morphorank {

using Vec = std::vector<double>;

struct EmbeddingTable {
    std::map<std::string, Vec> entries;  // ordered for deterministic iteration
    size_t dim = 0;

    const Vec* find(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
};

// Embedding file: `key \t v1 v2 ... vD`, dim inferred from the first line.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Deterministic unit-norm vector from a seeded hash of the key. Identical
// across runs and platforms for fixed (key, dim, seed).
Vec pseudo_embedding(const std::string& key, size_t dim, uint64_t seed);

double l2_norm(const Vec& v);
Vec normalized(Vec v);  // throws on zero norm
double cosine(const Vec& a, const Vec& b);

// Key for a morpheme's definition embedding in table files.
std::string definition_key(const std::string& surface);

// ---------------------------------------------------------------------------
// Provider abstraction. The file provider returns nullopt for unknown keys;
// the pseudo provider can embed anything.

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::optional<Vec> embed(const std::string& key) const = 0;
    virtual size_t dim() const = 0;
};

class FileProvider : public EmbeddingProvider {
public:
    explicit FileProvider(EmbeddingTable table) : table_(std::move(table)) {}
    std::optional<Vec> embed(const std::string& key) const override {
        const Vec* v = table_.find(key);
        if (!v) return std::nullopt;
        return *v;
    }
    size_t dim() const override { return table_.dim; }
    const EmbeddingTable& table() const { return table_; }

private:
    EmbeddingTable table_;
};

class PseudoProvider : public EmbeddingProvider {
public:
    PseudoProvider(size_t dim, uint64_t seed) : dim_(dim), seed_(seed) {}
    std::optional<Vec> embed(const std::string& key) const override {
        return pseudo_embedding(key, dim_, seed_);
    }
    size_t dim() const override { return dim_; }

private:
    size_t dim_;
    uint64_t seed_;
};

// Surface vector, fused with the definition vector when one exists:
// normalized arithmetic mean of the two. Throws if the surface key is
// missing from the provider.
Vec morpheme_vector(const Morpheme& m, const EmbeddingProvider& provider);

// ---------------------------------------------------------------------------
// Exact kNN index over morpheme surfaces.

struct Neighbor {
    std::string key;
    double similarity;
};

class NeighborIndex {
public:
    void add(const std::string& key, Vec v);
    // Top-k by cosine, ties broken by ascending key. Exact search.
    std::vector<Neighbor> knn(const Vec& query, size_t k) const;
    size_t size() const { return keys_.size(); }

private:
    std::vector<std::string> keys_;
    std::vector<Vec> unit_vecs_;
};

// Index over all inventory morphemes resolvable by the provider.
NeighborIndex build_morpheme_index(const TimeIndexedLexicon& lex, const EmbeddingProvider& provider);

}  // namespace morphorank
