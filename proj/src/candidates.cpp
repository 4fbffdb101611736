#include "morphorank/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace morphorank {

SeedFile load_seed_file(const std::filesystem::path& path) {
    SeedFile out;
    auto lines = read_lines(path);
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        auto fields = split(lines[ln], '\t');
        if (fields.size() != 3)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": expected 3 tab-separated fields");
        std::string word = lower(trim(fields[0]));
        std::string source = trim(fields[1]);
        if (source != "synset" && source != "relational")
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": source must be synset|relational");
        out.rows[word].emplace_back(source, lower(trim(fields[2])));
    }
    return out;
}

SeedSet build_seed_set(const ConceptItem& item, const TimeIndexedLexicon& lex, const SeedFile& seeds,
                       const YearTables& year_tables, size_t gate_k, SkipReport& report) {
    SeedSet out;
    out.concept_word = item.word;
    std::map<int, uint8_t> tags;

    auto it = seeds.rows.find(item.word);
    if (it == seeds.rows.end()) {
        report.add("seed file has no entry for '" + item.word + "'; distributional seeds only");
    } else {
        for (const auto& [source, surface] : it->second) {
            auto id = lex.find(surface);
            if (!id) {
                report.add("seed surface '" + surface + "' for '" + item.word + "' not in inventory, skipped");
                continue;
            }
            tags[*id] |= source == "synset" ? kSeedSynset : kSeedRelational;
        }
    }

    if (const EmbeddingTable* table = year_tables.for_year(item.emergence_year)) {
        if (const Vec* query = table->find(item.word)) {
            NeighborIndex index;
            for (const auto& m : lex.inventory) {
                if (const Vec* v = table->find(m.surface)) index.add(m.surface, *v);
            }
            for (const auto& nb : index.knn(*query, gate_k)) {
                auto id = lex.find(nb.key);
                if (id) tags[*id] |= kSeedDistributional;
            }
        }
    }

    std::set<int> avail = available_morphemes(lex, item.emergence_year);
    for (const auto& [id, tag] : tags) {
        if (!avail.count(id)) continue;
        out.morpheme_ids.push_back(id);
        out.source_tags.emplace(id, tag);
    }
    return out;
}

bool gate(const Candidate& candidate, const std::set<int>& knn_ids) {
    for (int i = 0; i < candidate.len; ++i)
        if (!knn_ids.count(candidate.ids[static_cast<size_t>(i)])) return false;
    return true;
}

namespace {

struct Entry {
    double prio;
    Candidate c;
};

// best first: higher priority, then shorter, then id-lexicographic
struct EntryCmp {
    bool operator()(const Entry& a, const Entry& b) const {
        if (a.prio != b.prio) return a.prio > b.prio;
        if (a.c.len != b.c.len) return a.c.len < b.c.len;
        return a.c.ids < b.c.ids;
    }
};

double mean_sim(const Candidate& c, const std::map<int, double>& sim_by_id) {
    double s = 0;
    for (int i = 0; i < c.len; ++i) {
        auto it = sim_by_id.find(c.ids[static_cast<size_t>(i)]);
        if (it == sim_by_id.end())
            throw std::invalid_argument("enumerate_candidates: missing similarity for morpheme id " +
                                        std::to_string(c.ids[static_cast<size_t>(i)]));
        s += it->second;
    }
    return s / c.len;
}

size_t joined_surface_len(const Candidate& c, const TimeIndexedLexicon& lex) {
    size_t n = 0;
    for (int i = 0; i < c.len; ++i) n += lex.morpheme(c.ids[static_cast<size_t>(i)]).surface.size();
    return n;
}

}  // namespace

CandidatePool enumerate_candidates(const SeedSet& seed_set, const ConceptItem& item, const GateConfig& config,
                                   const std::set<int>& knn_ids, const TimeIndexedLexicon& lex,
                                   const std::map<int, double>& sim_by_id) {
    CandidatePool pool;
    pool.word = item.word;
    pool.year = item.emergence_year;

    const size_t n_seeds = seed_set.morpheme_ids.size();
    double raw = 0;
    for (int m = 1; m <= config.max_len; ++m) raw += std::pow(static_cast<double>(n_seeds), m);
    pool.pre_gate_count = static_cast<size_t>(std::llround(raw));

    // only gated seeds can appear in a gated sequence
    std::vector<int> gated;
    for (int id : seed_set.morpheme_ids)
        if (knn_ids.count(id)) gated.push_back(id);

    std::set<Entry, EntryCmp> selected;
    Candidate cur;
    auto consider = [&](const Candidate& c) {
        ++pool.post_gate_count;
        if (joined_surface_len(c, lex) > config.max_surface_len) return;
        Entry e{mean_sim(c, sim_by_id), c};
        if (selected.size() < config.per_concept_cap) {
            selected.insert(e);
        } else {
            auto worst = std::prev(selected.end());
            if (EntryCmp{}(e, *worst)) {
                selected.erase(worst);
                selected.insert(e);
            }
        }
    };
    // iterative enumeration in lexicographic order per length
    for (int m = 1; m <= config.max_len; ++m) {
        if (gated.empty()) break;
        std::vector<size_t> pos(static_cast<size_t>(m), 0);
        while (true) {
            cur.len = m;
            cur.ids = {-1, -1, -1};
            for (int i = 0; i < m; ++i) cur.ids[static_cast<size_t>(i)] = gated[pos[static_cast<size_t>(i)]];
            consider(cur);
            int i = m - 1;
            while (i >= 0 && ++pos[static_cast<size_t>(i)] == gated.size()) {
                pos[static_cast<size_t>(i)] = 0;
                --i;
            }
            if (i < 0) break;
        }
    }

    // gold handling
    Candidate gold;
    gold.len = static_cast<int>(item.gold.size());
    for (size_t i = 0; i < item.gold.size(); ++i) gold.ids[i] = item.gold[i];
    gold.is_gold = true;
    pool.gold_gated_out = !gate(gold, knn_ids);

    bool found = false;
    for (auto it = selected.begin(); it != selected.end(); ++it) {
        if (it->c.same_sequence(gold)) {
            Entry e = *it;
            e.c.is_gold = true;
            selected.erase(it);
            selected.insert(e);
            found = true;
            break;
        }
    }
    if (!found) {
        pool.gold_force_inserted = true;
        if (selected.size() >= config.per_concept_cap && !selected.empty())
            selected.erase(std::prev(selected.end()));
        selected.insert(Entry{mean_sim(gold, sim_by_id), gold});
    }

    pool.candidates.reserve(selected.size());
    for (const auto& e : selected) {
        if (e.c.is_gold) pool.gold_index = pool.candidates.size();
        pool.candidates.push_back(e.c);
    }
    return pool;
}

std::vector<Candidate> sample_eval_candidates(const CandidatePool& pool, size_t n_max, Rng& rng) {
    if (pool.candidates.empty()) throw std::invalid_argument("sample_eval_candidates: empty pool");
    if (n_max == 0) throw std::invalid_argument("sample_eval_candidates: n_max must be >= 1");
    if (pool.candidates.size() <= n_max) return pool.candidates;

    std::vector<size_t> non_gold;
    non_gold.reserve(pool.candidates.size() - 1);
    for (size_t i = 0; i < pool.candidates.size(); ++i)
        if (i != pool.gold_index) non_gold.push_back(i);

    size_t take = std::min(n_max - 1, non_gold.size());
    for (size_t i = 0; i < take; ++i) {
        size_t j = i + rng.index(non_gold.size() - i);
        std::swap(non_gold[i], non_gold[j]);
    }
    non_gold.resize(take);
    non_gold.push_back(pool.gold_index);
    std::sort(non_gold.begin(), non_gold.end());

    std::vector<Candidate> out;
    out.reserve(non_gold.size());
    for (size_t idx : non_gold) out.push_back(pool.candidates[idx]);
    return out;
}

size_t gold_position(const std::vector<Candidate>& sample) {
    for (size_t i = 0; i < sample.size(); ++i)
        if (sample[i].is_gold) return i;
    throw std::logic_error("gold_position: sample contains no gold candidate");
}

void save_pool(const std::filesystem::path& path, const CandidatePool& pool, const TimeIndexedLexicon& lex) {
    std::ostringstream out;
    out << pool.word << '\t' << pool.year << '\t' << (pool.gold_gated_out ? 1 : 0) << '\t'
        << (pool.gold_force_inserted ? 1 : 0) << '\t' << pool.gold_index << '\t' << pool.pre_gate_count << '\t'
        << pool.post_gate_count << '\n';
    for (const auto& c : pool.candidates) {
        for (int i = 0; i < c.len; ++i) {
            if (i) out << '+';
            out << lex.morpheme(c.ids[static_cast<size_t>(i)]).surface;
        }
        out << '\n';
    }
    write_file_text(path, out.str());
}

CandidatePool load_pool(const std::filesystem::path& path, const TimeIndexedLexicon& lex) {
    auto lines = read_lines(path);
    if (lines.empty()) throw LoadError("empty pool file: " + path.string());
    auto header = split(lines[0], '\t');
    if (header.size() != 7) throw LoadError("bad pool header: " + path.string());
    CandidatePool pool;
    pool.word = header[0];
    pool.year = static_cast<int>(parse_long(header[1]).value_or(0));
    pool.gold_gated_out = header[2] == "1";
    pool.gold_force_inserted = header[3] == "1";
    pool.gold_index = static_cast<size_t>(parse_long(header[4]).value_or(0));
    pool.pre_gate_count = static_cast<size_t>(parse_long(header[5]).value_or(0));
    pool.post_gate_count = static_cast<size_t>(parse_long(header[6]).value_or(0));
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        Candidate c;
        auto surfaces = split(lines[ln], '+');
        if (surfaces.empty() || surfaces.size() > 3)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": candidate length outside 1-3");
        c.len = static_cast<int>(surfaces.size());
        for (size_t i = 0; i < surfaces.size(); ++i) {
            auto id = lex.find(surfaces[i]);
            if (!id)
                throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": unknown surface '" +
                                surfaces[i] + "'");
            c.ids[i] = *id;
        }
        c.is_gold = pool.candidates.size() == pool.gold_index;
        pool.candidates.push_back(c);
    }
    if (pool.gold_index >= pool.candidates.size()) throw LoadError("gold index out of range: " + path.string());
    return pool;
}

}  // namespace morphorank
