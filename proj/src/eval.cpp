#include "morphorank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace morphorank {

size_t rank_gold(const std::vector<double>& scores, size_t gold_index) {
    double g = scores[gold_index];
    size_t rank = 1;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (i == gold_index) continue;
        if (scores[i] >= g) ++rank;  // pessimistic: gold after all ties
    }
    return rank;
}

double mrr(const std::vector<RankingRecord>& records) {
    if (records.empty()) throw std::invalid_argument("mrr: no records");
    double s = 0;
    for (const auto& r : records) s += 1.0 / static_cast<double>(r.gold_rank);
    return s / static_cast<double>(records.size());
}

double acc_at_k(const std::vector<RankingRecord>& records, size_t k) {
    if (k < 1) throw std::invalid_argument("acc_at_k: k must be >= 1");
    if (records.empty()) throw std::invalid_argument("acc_at_k: no records");
    size_t hits = 0;
    for (const auto& r : records)
        if (r.gold_rank <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

LengthCurve length_curve(const std::vector<RankingRecord>& records, const std::vector<size_t>& ks) {
    LengthCurve curve;
    for (size_t k : ks) {
        double total = 0;
        size_t n = 0;
        for (const auto& r : records) {
            if (r.top_lengths.empty()) continue;
            if (k > r.top_lengths.size() && r.pool_size > r.top_lengths.size())
                throw std::invalid_argument("length_curve: k exceeds retained listing depth");
            size_t take = std::min(k, r.top_lengths.size());
            double item_mean = 0;
            for (size_t i = 0; i < take; ++i) item_mean += r.top_lengths[i];
            total += item_mean / static_cast<double>(take);
            ++n;
        }
        curve.points.emplace_back(k, n ? total / static_cast<double>(n) : 0.0);
    }
    return curve;
}

std::vector<size_t> sample_pool_indices(size_t n, size_t gold_index, size_t n_max, Rng& rng) {
    if (n == 0 || n_max == 0) throw std::invalid_argument("sample_pool_indices: empty pool or zero cap");
    if (n <= n_max) {
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    std::vector<size_t> non_gold;
    non_gold.reserve(n - 1);
    for (size_t i = 0; i < n; ++i)
        if (i != gold_index) non_gold.push_back(i);
    size_t take = std::min(n_max - 1, non_gold.size());
    for (size_t i = 0; i < take; ++i) {
        size_t j = i + rng.index(non_gold.size() - i);
        std::swap(non_gold[i], non_gold[j]);
    }
    non_gold.resize(take);
    non_gold.push_back(gold_index);
    std::sort(non_gold.begin(), non_gold.end());
    return non_gold;
}

FeatureBatch subset_batch(const FeatureBatch& batch, const std::vector<size_t>& indices) {
    FeatureBatch out;
    out.n = indices.size();
    out.sem.reserve(out.n * kSemDim);
    out.cost.reserve(out.n * kMaxPositions * kCostDim);
    out.mask.reserve(out.n * kMaxPositions);
    out.lengths.reserve(out.n);
    out.whole_fallback.reserve(out.n);
    bool gold_seen = false;
    for (size_t row = 0; row < indices.size(); ++row) {
        size_t i = indices[row];
        if (i >= batch.n) throw std::out_of_range("subset_batch: index out of range");
        if (i == batch.gold_index) {
            out.gold_index = row;
            gold_seen = true;
        }
        out.sem.insert(out.sem.end(), batch.sem.begin() + static_cast<std::ptrdiff_t>(i * kSemDim),
                       batch.sem.begin() + static_cast<std::ptrdiff_t>((i + 1) * kSemDim));
        out.cost.insert(out.cost.end(),
                        batch.cost.begin() + static_cast<std::ptrdiff_t>(i * kMaxPositions * kCostDim),
                        batch.cost.begin() + static_cast<std::ptrdiff_t>((i + 1) * kMaxPositions * kCostDim));
        out.mask.insert(out.mask.end(), batch.mask.begin() + static_cast<std::ptrdiff_t>(i * kMaxPositions),
                        batch.mask.begin() + static_cast<std::ptrdiff_t>((i + 1) * kMaxPositions));
        out.lengths.push_back(batch.lengths[i]);
        out.whole_fallback.push_back(batch.whole_fallback[i]);
    }
    if (!gold_seen) throw std::invalid_argument("subset_batch: gold index not in subset");
    return out;
}

EvalResult evaluate(const Model& model, const std::vector<RankItem>& items, size_t n_max, uint64_t seed) {
    EvalResult result;
    result.report.family = family_name(model.family());
    result.report.seed = seed;
    double gated_rr = 0;
    for (const auto& item : items) {
        Rng rng(splitmix64(seed ^ fnv1a(item.word)));
        auto indices = sample_pool_indices(item.batch.n, item.batch.gold_index, n_max, rng);
        FeatureBatch sub = subset_batch(item.batch, indices);

        RankingRecord rec;
        rec.word = item.word;
        rec.year = item.year;
        rec.pool_size = sub.n;
        rec.gold_gated_out = item.gold_gated_out;
        if (!item.labels.empty()) rec.gold_label = item.labels[item.batch.gold_index];

        if (item.gold_gated_out) {
            rec.gold_rank = sub.n;  // pessimistic diagnostic rank
            ++result.report.gated_out_count;
            gated_rr += 1.0 / static_cast<double>(rec.gold_rank);
            result.records.push_back(std::move(rec));
            continue;
        }

        std::vector<double> scores = model.score(sub);
        rec.raw_scores = scores;
        rec.gold_rank = rank_gold(scores, sub.gold_index);

        // top listing (score desc, then original order)
        std::vector<size_t> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return scores[a] > scores[b]; });
        size_t depth = std::min(kTopListingDepth, order.size());
        for (size_t i = 0; i < depth; ++i) {
            size_t row = order[i];
            rec.top_lengths.push_back(sub.lengths[row]);
            rec.top_scores.push_back(scores[row]);
            if (!item.labels.empty()) rec.top_labels.push_back(item.labels[indices[row]]);
        }
        result.records.push_back(std::move(rec));
    }

    std::vector<RankingRecord> scored;
    for (const auto& r : result.records)
        if (!r.gold_gated_out) scored.push_back(r);
    if (!scored.empty()) {
        result.report.item_count = scored.size();
        result.report.mrr = mrr(scored);
        for (size_t k : kAccGrid) result.report.acc_at_k.emplace_back(k, acc_at_k(scored, k));
    }
    if (result.report.gated_out_count)
        result.report.gated_out_mrr = gated_rr / static_cast<double>(result.report.gated_out_count);
    return result;
}

void report_tables(const std::vector<MetricsReport>& reports,
                   const std::map<std::string, std::vector<RankingRecord>>& records_by_family,
                   const std::vector<TemporalRow>& temporal, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ostringstream out;
        out << "family\tseed\tk\tacc_at_k\n";
        for (const auto& r : reports)
            for (const auto& [k, acc] : r.acc_at_k)
                out << r.family << '\t' << r.seed << '\t' << k << '\t' << format_double(acc) << '\n';
        write_file_text(out_dir / "acc_at_k.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << "family\tseed\titems\tmrr\tgated_out\tgated_out_mrr\n";
        for (const auto& r : reports)
            out << r.family << '\t' << r.seed << '\t' << r.item_count << '\t' << format_double(r.mrr) << '\t'
                << r.gated_out_count << '\t' << format_double(r.gated_out_mrr) << '\n';
        write_file_text(out_dir / "mrr.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << "family\tk\tmean_length\n";
        for (const auto& [family, records] : records_by_family) {
            std::vector<RankingRecord> scored;
            for (const auto& r : records)
                if (!r.gold_gated_out) scored.push_back(r);
            if (scored.empty()) continue;
            LengthCurve curve = length_curve(scored, kAccGrid);
            for (const auto& [k, v] : curve.points)
                out << family << '\t' << k << '\t' << format_double(v) << '\n';
        }
        write_file_text(out_dir / "length_curve.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << "end_year\tfamily\tmrr\tacc_at_10\ttrain_items\tskipped\n";
        for (const auto& t : temporal)
            out << t.end_year << '\t' << t.family << '\t' << format_double(t.mrr) << '\t'
                << format_double(t.acc10) << '\t' << t.train_items << '\t' << (t.skipped ? 1 : 0) << '\n';
        write_file_text(out_dir / "temporal.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << "family\tword\tyear\tgold\ttop_predictions\trank\tpool_size\tgated_out\n";
        for (const auto& [family, records] : records_by_family) {
            for (const auto& r : records) {
                out << family << '\t' << r.word << '\t' << r.year << '\t' << r.gold_label << '\t';
                size_t k = std::min(kQualitativeTopK, r.top_labels.size());
                for (size_t i = 0; i < k; ++i) {
                    if (i) out << " | ";
                    out << r.top_labels[i];
                }
                out << '\t' << r.gold_rank << '\t' << r.pool_size << '\t' << (r.gold_gated_out ? 1 : 0)
                    << '\n';
            }
        }
        write_file_text(out_dir / "qualitative.tsv", out.str());
    }
}

}  // namespace morphorank
