#pragma once
// Semantic statistics s(u,c), per-morpheme cost features x(mu,t), and
// padded/masked batch assembly.

#include <array>
#include <unordered_map>

#include "morphorank/candidates.hpp"
#include "morphorank/embeddings.hpp"

namespace morphorank {

constexpr size_t kSemDim = 5;
constexpr size_t kCostDim = 8;
constexpr size_t kMaxPositions = 3;

struct SemanticStats {
    double mean_sim = 0, max_sim = 0, std_sim = 0, entropy = 0, whole_sim = 0;
    // whole_sim came from the mean-of-morpheme-vectors fallback rather than
    // a joined-surface embedding
    bool whole_fallback = false;

    std::array<double, kSemDim> as_array() const { return {mean_sim, max_sim, std_sim, entropy, whole_sim}; }
};

struct FeatureBatch {
    size_t n = 0;
    std::vector<double> sem;      // n x 5
    std::vector<double> cost;     // n x 3 x 8, masked positions zero
    std::vector<double> mask;     // n x 3, 1 for valid positions
    std::vector<int> lengths;     // n
    size_t gold_index = 0;
    std::vector<uint8_t> whole_fallback;  // n

    const double* sem_row(size_t i) const { return sem.data() + i * kSemDim; }
    const double* cost_row(size_t i, size_t pos) const {
        return cost.data() + (i * kMaxPositions + pos) * kCostDim;
    }
    const double* mask_row(size_t i) const { return mask.data() + i * kMaxPositions; }
};

// Caches morpheme vectors and cost features across candidates of one run.
class FeatureContext {
public:
    FeatureContext(const TimeIndexedLexicon& lex, const EmbeddingProvider& provider);

    const Vec& morpheme_vec(int id) const;
    SemanticStats semantic_stats(const Candidate& c, const Vec& concept_vec) const;
    std::array<double, kCostDim> cost_features(int morpheme_id, int year) const;
    FeatureBatch assemble_batch(const std::vector<Candidate>& candidates, size_t gold_index,
                                const Vec& concept_vec, int year) const;

    const TimeIndexedLexicon& lexicon() const { return lex_; }
    const EmbeddingProvider& provider() const { return provider_; }

private:
    const TimeIndexedLexicon& lex_;
    const EmbeddingProvider& provider_;
    double median_phonemes_, median_syllables_;
    mutable std::unordered_map<int, Vec> vec_cache_;
    mutable std::unordered_map<uint64_t, std::array<double, kCostDim>> cost_cache_;
};

// Shannon entropy (natural log) of softmax(values).
double softmax_entropy(const std::vector<double>& values);

// Feature-dump TSV: one row per candidate with 5 stats, 24 cost entries and
// 3 mask bits.
std::string feature_dump_tsv(const FeatureBatch& batch);

}  // namespace morphorank
