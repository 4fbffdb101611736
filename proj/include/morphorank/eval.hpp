#pragma once
// Ranking metrics (MRR, Acc@k), length curves, the 1024-candidate
// evaluation protocol, and TSV report emission.

#include "morphorank/models.hpp"
#include "morphorank/rank_item.hpp"

namespace morphorank {

inline const std::vector<size_t> kAccGrid{1, 5, 10, 20, 50, 100};
constexpr size_t kEvalPoolMax = 1024;
constexpr size_t kTopListingDepth = 100;  // retained per record for length curves
constexpr size_t kQualitativeTopK = 3;

struct RankingRecord {
    std::string word;
    int year = 0;
    size_t pool_size = 0;
    size_t gold_rank = 0;  // 1-based
    bool gold_gated_out = false;
    std::string gold_label;
    // top candidates by score (descending, deterministic tie-break), up to
    // kTopListingDepth entries
    std::vector<int> top_lengths;
    std::vector<std::string> top_labels;
    std::vector<double> top_scores;
    std::vector<double> raw_scores;  // full sampled-pool scores, kept for oracle tests
};

struct MetricsReport {
    std::string family;
    uint64_t seed = 0;
    size_t item_count = 0;  // items contributing to the metrics
    double mrr = 0;
    std::vector<std::pair<size_t, double>> acc_at_k;  // over kAccGrid
    // gold_gated_out items are excluded above and reported separately with
    // pessimistic rank = pool size
    size_t gated_out_count = 0;
    double gated_out_mrr = 0;
};

struct LengthCurve {
    std::vector<std::pair<size_t, double>> points;  // (k, mean length), values in [1, 3]
};

// rank = 1 + #(non-gold with score > gold) + #(non-gold ties); gold is
// ranked after all ties.
size_t rank_gold(const std::vector<double>& scores, size_t gold_index);

double mrr(const std::vector<RankingRecord>& records);
double acc_at_k(const std::vector<RankingRecord>& records, size_t k);
LengthCurve length_curve(const std::vector<RankingRecord>& records, const std::vector<size_t>& ks);

// Samples up to n_max-1 non-gold indices plus the forced gold, uniform
// without replacement, original order preserved.
std::vector<size_t> sample_pool_indices(size_t n, size_t gold_index, size_t n_max, Rng& rng);

// Row subset of a batch (gold must be among `indices`).
FeatureBatch subset_batch(const FeatureBatch& batch, const std::vector<size_t>& indices);

struct EvalResult {
    MetricsReport report;
    std::vector<RankingRecord> records;
};

// Full protocol: per item, sample up to n_max candidates (one fixed sample
// per concept and seed), score, rank, aggregate.
EvalResult evaluate(const Model& model, const std::vector<RankItem>& items, size_t n_max, uint64_t seed);

// acc_at_k.tsv, mrr.tsv, length_curve.tsv, temporal.tsv, qualitative.tsv
struct TemporalRow {
    int end_year = 0;
    std::string family;
    double mrr = 0;
    double acc10 = 0;
    size_t train_items = 0;
    bool skipped = false;
};

void report_tables(const std::vector<MetricsReport>& reports,
                   const std::map<std::string, std::vector<RankingRecord>>& records_by_family,
                   const std::vector<TemporalRow>& temporal, const std::filesystem::path& out_dir);

}  // namespace morphorank
