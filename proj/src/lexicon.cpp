#include "morphorank/lexicon.hpp"

#include <algorithm>
#include <cctype>

namespace morphorank {

void FrequencySeries::rebuild_prefix_sums() {
    cum_type.resize(points.size());
    cum_token.resize(points.size());
    cum_standalone.resize(points.size());
    long t = 0, k = 0, s = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        t += points[i].type_delta;
        k += points[i].token_delta;
        s += points[i].standalone_delta;
        cum_type[i] = t;
        cum_token[i] = k;
        cum_standalone[i] = s;
    }
}

const Morpheme& TimeIndexedLexicon::morpheme(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= inventory.size())
        throw std::out_of_range("unknown morpheme id " + std::to_string(id));
    return inventory[static_cast<size_t>(id)];
}

std::optional<int> TimeIndexedLexicon::find(const std::string& surface) const {
    auto it = by_surface.find(surface);
    if (it == by_surface.end()) return std::nullopt;
    return it->second;
}

TimeIndexedLexicon load_inventory(const std::filesystem::path& path) {
    TimeIndexedLexicon lex;
    auto lines = read_lines(path);
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        auto fields = split(lines[ln], '\t');
        if (fields.size() != 3)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": expected 3 tab-separated fields");
        std::string surface = lower(trim(fields[0]));
        if (surface.empty())
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": empty surface");
        if (lex.by_surface.count(surface))
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": duplicate surface '" + surface + "'");
        Morpheme m;
        m.id = static_cast<int>(lex.inventory.size());
        m.surface = surface;
        std::string def = trim(fields[1]);
        if (!def.empty()) m.definition = def;
        std::string affix = trim(fields[2]);
        if (affix == "1")
            m.is_affix = true;
        else if (affix == "0")
            m.is_affix = false;
        else
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": is_affix must be 0 or 1");
        lex.by_surface.emplace(m.surface, m.id);
        lex.inventory.push_back(std::move(m));
    }
    lex.series.resize(lex.inventory.size());
    return lex;
}

TimeIndexedLexicon attach_frequencies(TimeIndexedLexicon lex, const std::filesystem::path& path,
                                      Resolution resolution, SkipReport& report) {
    auto lines = read_lines(path);
    std::unordered_map<int, FrequencySeries> building;
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        auto fields = split(lines[ln], '\t');
        if (fields.size() != 5)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": expected 5 tab-separated fields");
        std::string surface = lower(trim(fields[0]));
        auto id = lex.find(surface);
        if (!id) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": unknown surface '" + surface + "' skipped");
            continue;
        }
        auto year = parse_long(trim(fields[1]));
        auto ty = parse_long(trim(fields[2]));
        auto tok = parse_long(trim(fields[3]));
        auto st = parse_long(trim(fields[4]));
        if (!year || !ty || !tok || !st)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": malformed numeric field");
        if (*ty < 0 || *tok < 0 || *st < 0)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) + ": negative count");
        if (resolution == Resolution::decade && *year % 10 != 0)
            throw LoadError(path.string() + ":" + std::to_string(ln + 1) +
                            ": decade-resolution year not a multiple of 10");
        auto& fs = building[*id];
        fs.morpheme_id = *id;
        fs.resolution = resolution;
        fs.points.push_back(FreqPoint{static_cast<int>(*year), *ty, *tok, *st});
    }
    // deterministic order: ascending morpheme id
    std::vector<int> ids;
    ids.reserve(building.size());
    for (auto& [id, fs] : building) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (int id : ids) {
        auto& fs = building[id];
        std::sort(fs.points.begin(), fs.points.end(),
                  [](const FreqPoint& a, const FreqPoint& b) { return a.year < b.year; });
        for (size_t i = 1; i < fs.points.size(); ++i)
            if (fs.points[i].year == fs.points[i - 1].year)
                throw LoadError(path.string() + ": duplicate year " + std::to_string(fs.points[i].year) +
                                " for surface '" + lex.morpheme(id).surface + "'");
        fs.rebuild_prefix_sums();
        lex.min_year = std::min(lex.min_year, fs.points.front().year);
        lex.max_year = std::max(lex.max_year, fs.points.back().year);
        lex.series[static_cast<size_t>(id)].push_back(std::move(fs));
    }
    return lex;
}

std::pair<int, int> count_phones(const std::string& phone_field) {
    int phones = 0, syllables = 0;
    for (const auto& tok : split(phone_field, ' ')) {
        if (tok.empty()) continue;
        ++phones;
        if (std::isdigit(static_cast<unsigned char>(tok.back()))) ++syllables;
    }
    return {phones, syllables};
}

TimeIndexedLexicon attach_pronunciations(TimeIndexedLexicon lex, const std::filesystem::path& path,
                                         SkipReport& report) {
    auto lines = read_lines(path);
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        if (line.empty() || line.rfind(";;;", 0) == 0) continue;
        size_t sep = line.find("  ");
        if (sep == std::string::npos) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": unparseable line");
            continue;
        }
        std::string word = trim(line.substr(0, sep));
        // alternate pronunciations like "WORD(2)": keep the first entry only
        if (auto paren = word.find('('); paren != std::string::npos) continue;
        auto id = lex.find(lower(word));
        if (!id) continue;
        auto& m = lex.inventory[static_cast<size_t>(*id)];
        if (m.phoneme_count) continue;  // first entry wins
        auto [phones, sylls] = count_phones(line.substr(sep + 2));
        if (phones == 0 || sylls > phones) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": unparseable phone field");
            continue;
        }
        m.phoneme_count = phones;
        m.syllable_count = sylls;
    }
    return lex;
}

Dataset load_dataset(const std::filesystem::path& path, const TimeIndexedLexicon& lex, SkipReport& report) {
    Dataset ds;
    std::unordered_map<std::string, size_t> seen;
    auto lines = read_lines(path);
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        auto fields = split(lines[ln], '\t');
        if (fields.size() < 4 || fields.size() > 5) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": expected 4 or 5 fields, row rejected");
            continue;
        }
        ConceptItem item;
        item.word = lower(trim(fields[0]));
        item.gloss = trim(fields[1]);
        if (item.word.empty() || item.gloss.empty()) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": empty word or gloss, row rejected");
            continue;
        }
        if (seen.count(item.word)) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": duplicate word '" + item.word +
                       "', row rejected");
            continue;
        }
        auto year = parse_long(trim(fields[3]));
        if (!year || *year < kMinEmergenceYear || *year > kMaxEmergenceYear) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": emergence year outside " +
                       std::to_string(kMinEmergenceYear) + "-" + std::to_string(kMaxEmergenceYear) +
                       ", row rejected");
            continue;
        }
        item.emergence_year = static_cast<int>(*year);
        bool ok = true;
        auto golds = split(fields[2], '+');
        if (golds.empty() || golds.size() > kMaxGoldLen) {
            report.add(path.string() + ":" + std::to_string(ln + 1) + ": gold length " +
                       std::to_string(golds.size()) + " outside 1-3, row rejected");
            continue;
        }
        for (const auto& g : golds) {
            auto id = lex.find(lower(trim(g)));
            if (!id) {
                report.add(path.string() + ":" + std::to_string(ln + 1) + ": gold surface '" + trim(g) +
                           "' not in inventory, row rejected");
                ok = false;
                break;
            }
            item.gold.push_back(*id);
        }
        if (!ok) continue;
        if (fields.size() == 5) item.pos = trim(fields[4]);
        seen.emplace(item.word, ds.items.size());
        ds.items.push_back(std::move(item));
    }
    return ds;
}

namespace {

// Index of last point with year <= y, or -1.
int last_index_at(const FrequencySeries& fs, int y) {
    int lo = 0, hi = static_cast<int>(fs.points.size()) - 1, ans = -1;
    while (lo <= hi) {
        int mid = (lo + hi) / 2;
        if (fs.points[static_cast<size_t>(mid)].year <= y) {
            ans = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return ans;
}

}  // namespace

CumulativeCounts cumulative_counts(const TimeIndexedLexicon& lex, int morpheme_id, int year) {
    (void)lex.morpheme(morpheme_id);  // validates id
    CumulativeCounts out;
    for (const auto& fs : lex.series[static_cast<size_t>(morpheme_id)]) {
        int i = last_index_at(fs, year);
        if (i < 0) continue;
        out.type_count += fs.cum_type[static_cast<size_t>(i)];
        out.token_count += fs.cum_token[static_cast<size_t>(i)];
        out.standalone_count += fs.cum_standalone[static_cast<size_t>(i)];
    }
    return out;
}

WindowedCounts windowed_count(const TimeIndexedLexicon& lex, int morpheme_id, int year, int window) {
    if (window <= 0) throw std::invalid_argument("windowed_count: window must be > 0");
    (void)lex.morpheme(morpheme_id);
    WindowedCounts out;
    for (const auto& fs : lex.series[static_cast<size_t>(morpheme_id)]) {
        int hi = last_index_at(fs, year);
        int lo = last_index_at(fs, year - window);  // window is half-open: (year-window, year]
        if (hi < 0 || hi == lo) continue;
        long tok = fs.cum_token[static_cast<size_t>(hi)];
        long st = fs.cum_standalone[static_cast<size_t>(hi)];
        if (lo >= 0) {
            tok -= fs.cum_token[static_cast<size_t>(lo)];
            st -= fs.cum_standalone[static_cast<size_t>(lo)];
        }
        out.token_count += tok;
        out.standalone_count += st;
    }
    return out;
}

std::set<int> available_morphemes(const TimeIndexedLexicon& lex, int year) {
    std::set<int> out;
    for (const auto& m : lex.inventory) {
        const auto& series = lex.series[static_cast<size_t>(m.id)];
        if (series.empty()) {
            if (m.is_affix) out.insert(m.id);
            continue;
        }
        if (cumulative_counts(lex, m.id, year).token_count > 0) out.insert(m.id);
    }
    return out;
}

std::pair<double, double> phonology_medians(const TimeIndexedLexicon& lex) {
    std::vector<int> ph, sy;
    for (const auto& m : lex.inventory) {
        if (m.phoneme_count) ph.push_back(*m.phoneme_count);
        if (m.syllable_count) sy.push_back(*m.syllable_count);
    }
    auto median = [](std::vector<int>& v) -> double {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        size_t n = v.size();
        if (n % 2 == 1) return v[n / 2];
        return 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    return {median(ph), median(sy)};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr uint32_t kLexMagic = 0x4c58524d;  // "MRXL"
constexpr uint32_t kDsMagic = 0x5344524d;   // "MRDS"
constexpr uint32_t kVersion = 1;

void put_opt_int(ByteWriter& w, const std::optional<int>& v) {
    w.u8(v ? 1 : 0);
    if (v) w.i64(*v);
}

std::optional<int> get_opt_int(ByteReader& r) {
    if (r.u8() == 0) return std::nullopt;
    return static_cast<int>(r.i64());
}
}  // namespace

std::vector<unsigned char> serialize_lexicon(const TimeIndexedLexicon& lex) {
    ByteWriter w;
    w.u32(kLexMagic);
    w.u32(kVersion);
    w.i64(lex.min_year);
    w.i64(lex.max_year);
    w.u32(static_cast<uint32_t>(lex.inventory.size()));
    for (const auto& m : lex.inventory) {
        w.str(m.surface);
        w.u8(m.definition ? 1 : 0);
        if (m.definition) w.str(*m.definition);
        w.u8(m.is_affix ? 1 : 0);
        put_opt_int(w, m.phoneme_count);
        put_opt_int(w, m.syllable_count);
    }
    for (const auto& per_id : lex.series) {
        w.u32(static_cast<uint32_t>(per_id.size()));
        for (const auto& fs : per_id) {
            w.u8(fs.resolution == Resolution::decade ? 0 : 1);
            w.u32(static_cast<uint32_t>(fs.points.size()));
            for (const auto& p : fs.points) {
                w.i64(p.year);
                w.i64(p.type_delta);
                w.i64(p.token_delta);
                w.i64(p.standalone_delta);
            }
        }
    }
    return std::move(w.bytes);
}

TimeIndexedLexicon deserialize_lexicon(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes);
    if (r.u32() != kLexMagic) throw LoadError("bad lexicon magic");
    if (r.u32() != kVersion) throw LoadError("unsupported lexicon version");
    TimeIndexedLexicon lex;
    lex.min_year = static_cast<int>(r.i64());
    lex.max_year = static_cast<int>(r.i64());
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        Morpheme m;
        m.id = static_cast<int>(i);
        m.surface = r.str();
        if (r.u8()) m.definition = r.str();
        m.is_affix = r.u8() != 0;
        m.phoneme_count = get_opt_int(r);
        m.syllable_count = get_opt_int(r);
        lex.by_surface.emplace(m.surface, m.id);
        lex.inventory.push_back(std::move(m));
    }
    lex.series.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t ns = r.u32();
        for (uint32_t s = 0; s < ns; ++s) {
            FrequencySeries fs;
            fs.morpheme_id = static_cast<int>(i);
            fs.resolution = r.u8() == 0 ? Resolution::decade : Resolution::year;
            uint32_t np = r.u32();
            for (uint32_t p = 0; p < np; ++p) {
                FreqPoint pt;
                pt.year = static_cast<int>(r.i64());
                pt.type_delta = static_cast<long>(r.i64());
                pt.token_delta = static_cast<long>(r.i64());
                pt.standalone_delta = static_cast<long>(r.i64());
                fs.points.push_back(pt);
            }
            fs.rebuild_prefix_sums();
            lex.series[i].push_back(std::move(fs));
        }
    }
    return lex;
}

std::vector<unsigned char> serialize_dataset(const Dataset& ds) {
    ByteWriter w;
    w.u32(kDsMagic);
    w.u32(kVersion);
    w.u32(static_cast<uint32_t>(ds.items.size()));
    for (const auto& item : ds.items) {
        w.str(item.word);
        w.str(item.gloss);
        w.u32(static_cast<uint32_t>(item.gold.size()));
        for (int g : item.gold) w.i64(g);
        w.i64(item.emergence_year);
        w.str(item.pos);
    }
    return std::move(w.bytes);
}

Dataset deserialize_dataset(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes);
    if (r.u32() != kDsMagic) throw LoadError("bad dataset magic");
    if (r.u32() != kVersion) throw LoadError("unsupported dataset version");
    Dataset ds;
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ConceptItem item;
        item.word = r.str();
        item.gloss = r.str();
        uint32_t ng = r.u32();
        for (uint32_t g = 0; g < ng; ++g) item.gold.push_back(static_cast<int>(r.i64()));
        item.emergence_year = static_cast<int>(r.i64());
        item.pos = r.str();
        ds.items.push_back(std::move(item));
    }
    return ds;
}

void save_bundle(const std::filesystem::path& path, const TimeIndexedLexicon& lex, const Dataset& ds) {
    ByteWriter w;
    auto lb = serialize_lexicon(lex);
    auto db = serialize_dataset(ds);
    w.u64(lb.size());
    w.bytes.insert(w.bytes.end(), lb.begin(), lb.end());
    w.u64(db.size());
    w.bytes.insert(w.bytes.end(), db.begin(), db.end());
    write_file_bytes(path, w.bytes);
}

void load_bundle(const std::filesystem::path& path, TimeIndexedLexicon& lex, Dataset& ds) {
    auto bytes = read_file_bytes(path);
    ByteReader r(bytes);
    uint64_t ln = r.u64();
    r.need(ln);
    std::vector<unsigned char> lb(r.p, r.p + ln);
    r.p += ln;
    uint64_t dn = r.u64();
    r.need(dn);
    std::vector<unsigned char> db(r.p, r.p + dn);
    lex = deserialize_lexicon(lb);
    ds = deserialize_dataset(db);
}

}  // namespace morphorank
