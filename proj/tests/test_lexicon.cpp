#include <cmath>

#include "doctest.h"
#include "morphorank/lexicon.hpp"
#include "support/util.hpp"

using namespace morphorank;
using testutil::TempDir;

TEST_CASE("inventory loads rows with dense ids") {
    TempDir tmp("inv");
    auto p = tmp.file("inv.tsv", "laundr\twash clothes\t0\ny\tadjective suffix\t1\nify\tmake into\t1\n");
    auto lex = load_inventory(p);
    REQUIRE(lex.size() == 3);
    CHECK(lex.morpheme(0).surface == "laundr");
    CHECK(lex.morpheme(1).surface == "y");
    CHECK(lex.morpheme(2).surface == "ify");
    CHECK(lex.morpheme(1).is_affix);
    CHECK_FALSE(lex.morpheme(0).is_affix);
    CHECK(lex.find("laundr") == 0);
    CHECK_FALSE(lex.find("missing").has_value());
}

TEST_CASE("empty inventory file is not an error") {
    TempDir tmp("inv_empty");
    auto lex = load_inventory(tmp.file("inv.tsv", ""));
    CHECK(lex.size() == 0);
}

TEST_CASE("duplicate surface raises a load error naming the line") {
    TempDir tmp("inv_dup");
    auto p = tmp.file("inv.tsv", "pan\ta\t0\npan\tb\t0\n");
    CHECK_THROWS_AS(load_inventory(p), LoadError);
    try {
        load_inventory(p);
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

static TimeIndexedLexicon small_lex(TempDir& tmp) {
    auto p = tmp.file("inv.tsv", "pan\tvessel\t0\ny\tsuffix\t1\n");
    return load_inventory(p);
}

TEST_CASE("frequency attach builds prefix sums and reports unknowns") {
    TempDir tmp("freq");
    auto lex = small_lex(tmp);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1820\t1\t5\t2\npan\t1830\t1\t7\t3\nzzzz\t1820\t1\t1\t1\n");
    lex = attach_frequencies(std::move(lex), f, Resolution::decade, report);
    REQUIRE(lex.series[0].size() == 1);
    CHECK(lex.series[0][0].points.size() == 2);
    CHECK(report.entries.size() == 1);

    CHECK(cumulative_counts(lex, 0, 1830).token_count == 12);
    CHECK(cumulative_counts(lex, 0, 1825).token_count == 5);
    CHECK(cumulative_counts(lex, 0, 1819).token_count == 0);
}

TEST_CASE("decade resolution rejects off-decade years") {
    TempDir tmp("freq_dec");
    auto lex = small_lex(tmp);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1825\t1\t5\t2\n");
    CHECK_THROWS_AS(attach_frequencies(std::move(lex), f, Resolution::decade, report), LoadError);
}

TEST_CASE("negative counts are fatal") {
    TempDir tmp("freq_neg");
    auto lex = small_lex(tmp);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1820\t1\t-5\t2\n");
    CHECK_THROWS_AS(attach_frequencies(std::move(lex), f, Resolution::decade, report), LoadError);
}

TEST_CASE("trailing window is half-open on the low side") {
    TempDir tmp("win");
    auto lex = small_lex(tmp);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1820\t1\t5\t1\npan\t1830\t1\t7\t1\npan\t1860\t1\t2\t1\n");
    lex = attach_frequencies(std::move(lex), f, Resolution::decade, report);
    // (1830, 1860] excludes the 1830 point
    CHECK(windowed_count(lex, 0, 1860).token_count == 2);
    // window covering everything equals the cumulative value
    CHECK(windowed_count(lex, 0, 1860, 1000).token_count == cumulative_counts(lex, 0, 1860).token_count);
    CHECK(windowed_count(lex, 0, 1819).token_count == 0);
}

TEST_CASE("pronunciations: CMU lines, comments, variants") {
    TempDir tmp("cmu");
    auto p = tmp.file("inv.tsv", "pan\tvessel\t0\na\tarticle\t0\nwind\tair\t0\ny\tsuffix\t1\n");
    auto lex = load_inventory(p);
    SkipReport report;
    auto d = tmp.file("dict.txt",
                      ";;; comment\nPAN  P AE1 N\nA  AH0\nA(2)  EY1\nWIND  W IH1 N D\nWIND(2)  W AY1 N D\n");
    lex = attach_pronunciations(std::move(lex), d, report);
    CHECK(lex.morpheme(0).phoneme_count == 3);
    CHECK(lex.morpheme(0).syllable_count == 1);
    CHECK(lex.morpheme(1).phoneme_count == 1);
    CHECK(lex.morpheme(1).syllable_count == 1);
    CHECK(lex.morpheme(2).phoneme_count == 4);  // first entry wins
    CHECK_FALSE(lex.morpheme(3).phoneme_count.has_value());
}

TEST_CASE("count_phones counts tokens and stress digits") {
    CHECK(count_phones("P AE1 N") == std::pair<int, int>(3, 1));
    CHECK(count_phones("AH0") == std::pair<int, int>(1, 1));
    CHECK(count_phones("AH0 F IH1 L IY0 EY2 T") == std::pair<int, int>(7, 4));
}

TEST_CASE("dataset rows are validated and rejections reported") {
    TempDir tmp("ds");
    auto p = tmp.file("inv.tsv", "laundr\twash\t0\ny\tsuffix\t1\n");
    auto lex = load_inventory(p);
    SkipReport report;
    auto d = tmp.file("ds.tsv",
                      "laundry\twashing of clothes\tlaundr+y\t1830\tn\n"
                      "bad1\tgloss\tlaundr+y+y+y\t1830\tn\n"          // gold too long
                      "bad2\tgloss\tmissing+y\t1830\tn\n"             // unresolvable
                      "bad3\tgloss\tlaundr\t1700\tn\n"                // year out of range
                      "laundry\tduplicate\tlaundr\t1830\tn\n");       // duplicate word
    auto ds = load_dataset(d, lex, report);
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items[0].word == "laundry");
    CHECK(ds.items[0].gold == std::vector<int>{0, 1});
    CHECK(report.entries.size() == 4);
}

TEST_CASE("availability: attested content morphemes plus series-free affixes") {
    TempDir tmp("avail");
    auto p = tmp.file("inv.tsv", "pan\tvessel\t0\nlate\tlate word\t0\ny\tsuffix\t1\n");
    auto lex = load_inventory(p);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1820\t1\t5\t1\nlate\t1900\t1\t5\t1\n");
    lex = attach_frequencies(std::move(lex), f, Resolution::decade, report);

    auto avail_1850 = available_morphemes(lex, 1850);
    CHECK(avail_1850.count(0) == 1);   // pan attested 1820
    CHECK(avail_1850.count(1) == 0);   // late first attested 1900
    CHECK(avail_1850.count(2) == 1);   // affix without series always available
    auto avail_1900 = available_morphemes(lex, 1900);
    CHECK(avail_1900.count(1) == 1);

    // availability is monotone in the year
    for (int y = 1820; y <= 2000; y += 7) {
        auto a = available_morphemes(lex, y);
        auto b = available_morphemes(lex, y + 7);
        for (int id : a) CHECK(b.count(id) == 1);
    }
}

TEST_CASE("bundle round-trip is byte-identical") {
    TempDir tmp("bundle");
    auto p = tmp.file("inv.tsv", "pan\tvessel\t0\ny\tsuffix\t1\n");
    auto lex = load_inventory(p);
    SkipReport report;
    auto f = tmp.file("f.tsv", "pan\t1820\t2\t5\t1\n");
    lex = attach_frequencies(std::move(lex), f, Resolution::decade, report);
    auto d = tmp.file("ds.tsv", "panny\tsmall pan\tpan+y\t1850\tn\n");
    auto ds = load_dataset(d, lex, report);

    auto b1 = tmp.path / "a.bundle";
    save_bundle(b1, lex, ds);
    TimeIndexedLexicon lex2;
    Dataset ds2;
    load_bundle(b1, lex2, ds2);
    auto b2 = tmp.path / "b.bundle";
    save_bundle(b2, lex2, ds2);
    CHECK(read_file_bytes(b1) == read_file_bytes(b2));
    CHECK(lex2.size() == lex.size());
    CHECK(ds2.items.size() == 1);
    CHECK(ds2.items[0].gold == ds.items[0].gold);
}

TEST_CASE("phonology medians fall back to zero when absent") {
    TempDir tmp("med");
    auto lex = load_inventory(tmp.file("inv.tsv", "pan\tvessel\t0\n"));
    auto [ph, sy] = phonology_medians(lex);
    CHECK(ph == 0.0);
    CHECK(sy == 0.0);
}
