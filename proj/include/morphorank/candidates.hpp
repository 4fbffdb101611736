#pragma once
// Candidate construction: seed morphemes from the three sources, ordered
// enumeration up to length 3, semantic gating, cap truncation, and
// evaluation-pool sampling.

#include <array>
#include <map>
#include <set>

#include "morphorank/embeddings.hpp"
#include "morphorank/lexicon.hpp"

namespace morphorank {

enum SeedSource : uint8_t {
    kSeedSynset = 1,
    kSeedRelational = 2,
    kSeedDistributional = 4,
};

struct SeedSet {
    std::string concept_word;
    std::vector<int> morpheme_ids;          // sorted ascending, unique
    std::map<int, uint8_t> source_tags;     // id -> SeedSource bit set
};

struct Candidate {
    std::array<int, 3> ids{-1, -1, -1};
    int len = 0;
    bool is_gold = false;

    bool same_sequence(const Candidate& o) const { return len == o.len && ids == o.ids; }
};

struct GateConfig {
    size_t gate_k = 200;
    int max_len = 3;
    size_t per_concept_cap = 4096;
    size_t max_surface_len = 20;
};

struct CandidatePool {
    std::string word;
    int year = 0;
    std::vector<Candidate> candidates;
    size_t gold_index = 0;
    bool gold_gated_out = false;
    bool gold_force_inserted = false;
    // enumeration statistics (before gate / after gate, both pre-cap)
    size_t pre_gate_count = 0;
    size_t post_gate_count = 0;
};

// ---------------------------------------------------------------------------
// Seed file: `word \t source(synset|relational) \t morpheme_surface`.

struct SeedFile {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> rows;  // word -> (source, surface)
};

SeedFile load_seed_file(const std::filesystem::path& path);

// Year-tagged distributional embedding tables (year -> table). The table
// used for an item is the one with the greatest year <= t.
struct YearTables {
    std::map<int, EmbeddingTable> tables;

    const EmbeddingTable* for_year(int year) const {
        const EmbeddingTable* best = nullptr;
        for (const auto& [y, t] : tables) {
            if (y <= year) best = &t;
        }
        return best;
    }
};

// Union of synset/relational seeds (seed file) and distributional neighbors
// (year table kNN of the item's word), filtered to morphemes available at
// the emergence year.
SeedSet build_seed_set(const ConceptItem& item, const TimeIndexedLexicon& lex, const SeedFile& seeds,
                       const YearTables& year_tables, size_t gate_k, SkipReport& report);

// True iff every morpheme of the candidate is inside the gloss's kNN set.
bool gate(const Candidate& candidate, const std::set<int>& knn_ids);

// All ordered sequences with repetition over the seed set (lengths
// 1..max_len), gated, length-filtered, truncated to per_concept_cap by
// descending mean morpheme-concept similarity (ties: shorter first, then
// id-lexicographic). Gold is force-inserted when missing.
// `sim_by_id` must cover every seed id and every gold id.
CandidatePool enumerate_candidates(const SeedSet& seed_set, const ConceptItem& item, const GateConfig& config,
                                   const std::set<int>& knn_ids, const TimeIndexedLexicon& lex,
                                   const std::map<int, double>& sim_by_id);

// Gold plus up to n_max-1 non-gold candidates drawn uniformly without
// replacement; original pool order preserved.
std::vector<Candidate> sample_eval_candidates(const CandidatePool& pool, size_t n_max, Rng& rng);

// Index of the gold candidate in a sampled sequence.
size_t gold_position(const std::vector<Candidate>& sample);

// ---------------------------------------------------------------------------
// Pool cache files

void save_pool(const std::filesystem::path& path, const CandidatePool& pool, const TimeIndexedLexicon& lex);
CandidatePool load_pool(const std::filesystem::path& path, const TimeIndexedLexicon& lex);

}  // namespace morphorank
