#include "morphorank/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace morphorank {

double softmax_entropy(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mx = *std::max_element(values.begin(), values.end());
    double z = 0;
    std::vector<double> e(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        e[i] = std::exp(values[i] - mx);
        z += e[i];
    }
    double h = 0;
    for (double x : e) {
        double p = x / z;
        if (p > 0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

FeatureContext::FeatureContext(const TimeIndexedLexicon& lex, const EmbeddingProvider& provider)
    : lex_(lex), provider_(provider) {
    auto [ph, sy] = phonology_medians(lex);
    median_phonemes_ = ph;
    median_syllables_ = sy;
}

const Vec& FeatureContext::morpheme_vec(int id) const {
    auto it = vec_cache_.find(id);
    if (it != vec_cache_.end()) return it->second;
    Vec v = morpheme_vector(lex_.morpheme(id), provider_);
    return vec_cache_.emplace(id, std::move(v)).first->second;
}

SemanticStats FeatureContext::semantic_stats(const Candidate& c, const Vec& concept_vec) const {
    SemanticStats out;
    std::vector<double> sims(static_cast<size_t>(c.len));
    Vec sum(concept_vec.size(), 0.0);
    for (int i = 0; i < c.len; ++i) {
        const Vec& mv = morpheme_vec(c.ids[static_cast<size_t>(i)]);
        sims[static_cast<size_t>(i)] = cosine(mv, concept_vec);
        for (size_t d = 0; d < sum.size(); ++d) sum[d] += mv[d];
    }
    double mean = 0;
    for (double s : sims) mean += s;
    mean /= c.len;
    double var = 0;
    for (double s : sims) var += (s - mean) * (s - mean);
    var /= c.len;  // population variance: length-1 candidates get 0
    out.mean_sim = mean;
    out.max_sim = *std::max_element(sims.begin(), sims.end());
    out.std_sim = std::sqrt(var);
    out.entropy = c.len == 1 ? 0.0 : softmax_entropy(sims);

    std::string joined;
    for (int i = 0; i < c.len; ++i) joined += lex_.morpheme(c.ids[static_cast<size_t>(i)]).surface;
    if (auto whole = provider_.embed(joined)) {
        out.whole_sim = cosine(*whole, concept_vec);
    } else {
        out.whole_sim = cosine(sum, concept_vec);  // cosine is scale-invariant, mean == sum direction
        out.whole_fallback = true;
    }
    return out;
}

std::array<double, kCostDim> FeatureContext::cost_features(int morpheme_id, int year) const {
    uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(morpheme_id)) << 32) |
                   static_cast<uint32_t>(year);
    auto it = cost_cache_.find(key);
    if (it != cost_cache_.end()) return it->second;

    const Morpheme& m = lex_.morpheme(morpheme_id);
    auto cum = cumulative_counts(lex_, morpheme_id, year);
    auto win = windowed_count(lex_, morpheme_id, year);
    auto ln1p = [](long v) { return std::log1p(static_cast<double>(std::max(v, 0L))); };

    std::array<double, kCostDim> x{};
    x[0] = static_cast<double>(m.surface.size());
    x[1] = ln1p(cum.type_count);
    x[2] = ln1p(cum.token_count);
    x[3] = ln1p(win.token_count);
    x[4] = ln1p(cum.standalone_count);
    x[5] = ln1p(win.standalone_count);
    x[6] = m.phoneme_count ? static_cast<double>(*m.phoneme_count) : median_phonemes_;
    x[7] = m.syllable_count ? static_cast<double>(*m.syllable_count) : median_syllables_;
    cost_cache_.emplace(key, x);
    return x;
}

FeatureBatch FeatureContext::assemble_batch(const std::vector<Candidate>& candidates, size_t gold_index,
                                            const Vec& concept_vec, int year) const {
    FeatureBatch b;
    b.n = candidates.size();
    b.sem.assign(b.n * kSemDim, 0.0);
    b.cost.assign(b.n * kMaxPositions * kCostDim, 0.0);
    b.mask.assign(b.n * kMaxPositions, 0.0);
    b.lengths.resize(b.n);
    b.whole_fallback.resize(b.n, 0);
    b.gold_index = gold_index;
    for (size_t i = 0; i < b.n; ++i) {
        const Candidate& c = candidates[i];
        SemanticStats st = semantic_stats(c, concept_vec);
        auto arr = st.as_array();
        std::copy(arr.begin(), arr.end(), b.sem.begin() + static_cast<std::ptrdiff_t>(i * kSemDim));
        b.whole_fallback[i] = st.whole_fallback ? 1 : 0;
        b.lengths[i] = c.len;
        for (int p = 0; p < c.len; ++p) {
            auto x = cost_features(c.ids[static_cast<size_t>(p)], year);
            std::copy(x.begin(), x.end(),
                      b.cost.begin() +
                          static_cast<std::ptrdiff_t>((i * kMaxPositions + static_cast<size_t>(p)) * kCostDim));
            b.mask[i * kMaxPositions + static_cast<size_t>(p)] = 1.0;
        }
    }
    return b;
}

std::string feature_dump_tsv(const FeatureBatch& batch) {
    std::ostringstream out;
    out << "mean_sim\tmax_sim\tstd_sim\tentropy\twhole_sim";
    for (size_t p = 0; p < kMaxPositions; ++p)
        for (size_t f = 0; f < kCostDim; ++f) out << "\tcost_" << p << '_' << f;
    out << "\tmask_0\tmask_1\tmask_2\n";
    for (size_t i = 0; i < batch.n; ++i) {
        for (size_t f = 0; f < kSemDim; ++f) {
            if (f) out << '\t';
            out << format_double(batch.sem[i * kSemDim + f]);
        }
        for (size_t p = 0; p < kMaxPositions; ++p)
            for (size_t f = 0; f < kCostDim; ++f)
                out << '\t' << format_double(batch.cost[(i * kMaxPositions + p) * kCostDim + f]);
        for (size_t p = 0; p < kMaxPositions; ++p) out << '\t' << format_double(batch.mask[i * kMaxPositions + p]);
        out << '\n';
    }
    return out.str();
}

}  // namespace morphorank
