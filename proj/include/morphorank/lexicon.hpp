#pragma once
// Time-indexed lexicon: morpheme inventory, diachronic frequency series,
// pronunciations, and the concept dataset.

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphorank/common.hpp"

namespace morphorank {

constexpr int kMinEmergenceYear = 1820;
constexpr int kMaxEmergenceYear = 2019;
constexpr int kMaxGoldLen = 3;

struct Morpheme {
    int id = -1;
    std::string surface;
    std::optional<std::string> definition;
    bool is_affix = false;
    std::optional<int> phoneme_count;
    std::optional<int> syllable_count;
};

struct FreqPoint {
    int year = 0;
    long type_delta = 0;
    long token_delta = 0;
    long standalone_delta = 0;
};

enum class Resolution { decade, year };

struct FrequencySeries {
    int morpheme_id = -1;
    Resolution resolution = Resolution::year;
    std::vector<FreqPoint> points;  // years strictly increasing
    // prefix sums aligned with points
    std::vector<long> cum_type, cum_token, cum_standalone;

    void rebuild_prefix_sums();
};

// Lines skipped or rejected during a load, with reasons. Never fatal.
struct SkipReport {
    std::vector<std::string> entries;

    void add(const std::string& what) { entries.push_back(what); }
    bool empty() const { return entries.empty(); }
};

struct TimeIndexedLexicon {
    std::vector<Morpheme> inventory;  // id == index
    std::unordered_map<std::string, int> by_surface;
    std::vector<std::vector<FrequencySeries>> series;  // per morpheme id
    int min_year = kMinEmergenceYear;
    int max_year = kMaxEmergenceYear;

    size_t size() const { return inventory.size(); }
    const Morpheme& morpheme(int id) const;
    std::optional<int> find(const std::string& surface) const;
};

struct ConceptItem {
    std::string word;
    std::string gloss;
    std::vector<int> gold;  // morpheme ids, length 1..3
    int emergence_year = 0;
    std::string pos;  // optional, may be empty
};

struct Dataset {
    std::vector<ConceptItem> items;
};

// ---------------------------------------------------------------------------
// Loading

// Inventory TSV: surface \t definition \t is_affix(0|1), no header.
TimeIndexedLexicon load_inventory(const std::filesystem::path& path);

// Frequency TSV: surface \t year \t type_delta \t token_delta \t standalone_delta.
// Unknown surfaces are skipped and reported.
TimeIndexedLexicon attach_frequencies(TimeIndexedLexicon lex, const std::filesystem::path& path,
                                      Resolution resolution, SkipReport& report);

// CMU dict text format; comment lines starting ";;;" are ignored.
TimeIndexedLexicon attach_pronunciations(TimeIndexedLexicon lex, const std::filesystem::path& path,
                                         SkipReport& report);

// Dataset TSV: word \t gloss \t gold1+gold2+... \t year \t pos.
Dataset load_dataset(const std::filesystem::path& path, const TimeIndexedLexicon& lex, SkipReport& report);

// Counts a single CMU pronunciation field: phones, and phones carrying a
// stress digit (= syllables).
std::pair<int, int> count_phones(const std::string& phone_field);

// ---------------------------------------------------------------------------
// Queries

struct CumulativeCounts {
    long type_count = 0;
    long token_count = 0;
    long standalone_count = 0;
};

// Sums of deltas over points with point.year <= year, across all series.
CumulativeCounts cumulative_counts(const TimeIndexedLexicon& lex, int morpheme_id, int year);

// Sums over the half-open trailing window (year - window, year].
struct WindowedCounts {
    long token_count = 0;
    long standalone_count = 0;
};
WindowedCounts windowed_count(const TimeIndexedLexicon& lex, int morpheme_id, int year, int window = 30);

// Ids attested by `year` (cumulative token count > 0), plus affix-inventory
// morphemes without any frequency series, which are always available.
std::set<int> available_morphemes(const TimeIndexedLexicon& lex, int year);

// Median phoneme / syllable counts over morphemes that have them; 0 if none.
std::pair<double, double> phonology_medians(const TimeIndexedLexicon& lex);

// ---------------------------------------------------------------------------
// Serialization (versioned binary bundle; byte-stable across reloads)

std::vector<unsigned char> serialize_lexicon(const TimeIndexedLexicon& lex);
TimeIndexedLexicon deserialize_lexicon(const std::vector<unsigned char>& bytes);

std::vector<unsigned char> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(const std::vector<unsigned char>& bytes);

void save_bundle(const std::filesystem::path& path, const TimeIndexedLexicon& lex, const Dataset& ds);
void load_bundle(const std::filesystem::path& path, TimeIndexedLexicon& lex, Dataset& ds);

}  // namespace morphorank
