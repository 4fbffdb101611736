#include "morphorank/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace morphorank {

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    EmbeddingTable table;
    auto lines = read_lines(path);
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        auto fields = split(lines[ln], '\t');
        if (fields.size() != 2)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": expected `key \\t values`");
        const std::string& key = fields[0];
        if (table.entries.count(key))
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": repeated key '" + key + "'");
        Vec v;
        std::istringstream ss(fields[1]);
        std::string tok;
        while (ss >> tok) {
            auto d = parse_double(tok);
            if (!d || !std::isfinite(*d))
                throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": non-finite or malformed value");
            v.push_back(*d);
        }
        if (v.empty()) throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": empty vector");
        if (table.dim == 0)
            table.dim = v.size();
        else if (v.size() != table.dim)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": dim " + std::to_string(v.size()) +
                            " != table dim " + std::to_string(table.dim));
        table.entries.emplace(key, std::move(v));
    }
    return table;
}

Vec pseudo_embedding(const std::string& key, size_t dim, uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("pseudo_embedding: dim must be > 0");
    uint64_t state = splitmix64(fnv1a(key) ^ splitmix64(seed));
    Vec v(dim);
    for (size_t i = 0; i < dim; ++i) {
        state = splitmix64(state);
        // map to (-1, 1); the exact distribution is irrelevant, only
        // determinism and non-degeneracy matter
        v[i] = static_cast<double>(static_cast<int64_t>(state)) * 0x1.0p-63;
        if (v[i] == 0.0) v[i] = 0.5;
    }
    return normalized(std::move(v));
}

double l2_norm(const Vec& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Vec normalized(Vec v) {
    double n = l2_norm(v);
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    for (double& x : v) x /= n;
    return v;
}

double cosine(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dim mismatch");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero-norm vector");
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

std::string definition_key(const std::string& surface) { return surface + "#def"; }

Vec morpheme_vector(const Morpheme& m, const EmbeddingProvider& provider) {
    auto surf = provider.embed(m.surface);
    if (!surf) throw LoadError("no embedding for morpheme surface '" + m.surface + "'");
    if (!m.definition) return *surf;
    auto def = provider.embed(definition_key(m.surface));
    if (!def) return *surf;
    Vec mean(surf->size());
    for (size_t i = 0; i < mean.size(); ++i) mean[i] = 0.5 * ((*surf)[i] + (*def)[i]);
    return normalized(std::move(mean));
}

void NeighborIndex::add(const std::string& key, Vec v) {
    keys_.push_back(key);
    unit_vecs_.push_back(normalized(std::move(v)));
}

std::vector<Neighbor> NeighborIndex::knn(const Vec& query, size_t k) const {
    if (k == 0) throw std::invalid_argument("knn: k must be >= 1");
    if (keys_.empty()) return {};
    Vec q = normalized(query);
    std::vector<size_t> order(keys_.size());
    std::vector<double> sims(keys_.size());
    for (size_t i = 0; i < keys_.size(); ++i) {
        double dot = 0;
        const Vec& v = unit_vecs_[i];
        for (size_t j = 0; j < v.size(); ++j) dot += v[j] * q[j];
        sims[i] = std::clamp(dot, -1.0, 1.0);
        order[i] = i;
    }
    auto cmp = [&](size_t a, size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return keys_[a] < keys_[b];
    };
    size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), cmp);
    std::vector<Neighbor> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) out.push_back(Neighbor{keys_[order[i]], sims[order[i]]});
    return out;
}

NeighborIndex build_morpheme_index(const TimeIndexedLexicon& lex, const EmbeddingProvider& provider) {
    NeighborIndex index;
    for (const auto& m : lex.inventory) {
        auto v = provider.embed(m.surface);
        if (!v) continue;
        index.add(m.surface, morpheme_vector(m, provider));
    }
    return index;
}

}  // namespace morphorank
