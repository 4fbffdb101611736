#include <cmath>

#include "doctest.h"
#include "morphorank/features.hpp"
#include "support/util.hpp"

using namespace morphorank;
using testutil::TempDir;

TEST_CASE("softmax entropy oracles") {
    // hand value for softmax([0.8, 0.4]) = (0.5987, 0.4013)
    CHECK(softmax_entropy({0.8, 0.4}) == doctest::Approx(0.6735).epsilon(1e-3));
    CHECK(softmax_entropy({1.0, 1.0, 1.0}) == doctest::Approx(std::log(3.0)));
    // entropy never exceeds ln m
    Rng rng(3);
    for (int t = 0; t < 40; ++t) {
        size_t m = 2 + rng.index(5);
        std::vector<double> v(m);
        for (auto& x : v) x = 4.0 * rng.normal();
        double h = softmax_entropy(v);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(m)) + 1e-12);
    }
}

namespace {

struct Fixture {
    TempDir tmp{"feat"};
    TimeIndexedLexicon lex;
    EmbeddingTable table;

    Fixture() {
        auto p = tmp.file("inv.tsv", "pan\tvessel\t0\nsauce\trelish\t0\nzero\tnothing\t0\n");
        lex = load_inventory(p);
        SkipReport report;
        // pan: 999 tokens cumulative at 1850
        auto f = tmp.file("f.tsv", "pan\t1820\t3\t999\t400\nsauce\t1820\t2\t150\t60\n");
        lex = attach_frequencies(std::move(lex), f, Resolution::decade, report);
        auto d = tmp.file("dict.txt", "PAN  P AE1 N\nSAUCE  S AO1 S\n");
        lex = attach_pronunciations(std::move(lex), d, report);

        table.dim = 3;
        table.entries["pan"] = {1, 0, 0};
        table.entries["sauce"] = {0, 1, 0};
        table.entries["zero"] = {0, 0, 1};
    }
};

Candidate cand(std::initializer_list<int> ids) {
    Candidate c;
    c.len = static_cast<int>(ids.size());
    int i = 0;
    for (int id : ids) c.ids[static_cast<size_t>(i++)] = id;
    return c;
}

}  // namespace

TEST_CASE("semantic stats on controlled similarities") {
    Fixture fx;
    FileProvider provider(fx.table);
    FeatureContext fc(fx.lex, provider);

    // concept chosen so cos(pan, c) = 0.8 and cos(sauce, c) = 0.4
    Vec c{0.8, 0.4, std::sqrt(1.0 - 0.64 - 0.16)};
    auto st = fc.semantic_stats(cand({0, 1}), c);
    CHECK(st.mean_sim == doctest::Approx(0.6));
    CHECK(st.max_sim == doctest::Approx(0.8));
    CHECK(st.std_sim == doctest::Approx(0.2));
    CHECK(st.entropy == doctest::Approx(0.6735).epsilon(1e-3));
    CHECK(st.whole_fallback);  // "pansauce" is not in the table
    // fallback whole_sim = cosine of the summed morpheme vectors
    CHECK(st.whole_sim == doctest::Approx(cosine(Vec{1, 1, 0}, c)));

    // single morpheme equal to the concept: (1, 1, 0, 0, ...)
    auto st1 = fc.semantic_stats(cand({0}), Vec{1, 0, 0});
    CHECK(st1.mean_sim == doctest::Approx(1.0));
    CHECK(st1.max_sim == doctest::Approx(1.0));
    CHECK(st1.std_sim == doctest::Approx(0.0));
    CHECK(st1.entropy == doctest::Approx(0.0));
}

TEST_CASE("whole_sim fallback is permutation-invariant") {
    Fixture fx;
    FileProvider provider(fx.table);
    FeatureContext fc(fx.lex, provider);
    Vec c{0.6, 0.48, 0.64};
    auto a = fc.semantic_stats(cand({0, 1, 2}), c);
    auto b = fc.semantic_stats(cand({2, 0, 1}), c);
    CHECK(a.whole_sim == doctest::Approx(b.whole_sim));
    CHECK(a.mean_sim == doctest::Approx(b.mean_sim));
}

TEST_CASE("cost features: counts, logs, phonology") {
    Fixture fx;
    FileProvider provider(fx.table);
    FeatureContext fc(fx.lex, provider);

    auto x = fc.cost_features(0, 1850);  // pan
    CHECK(x[0] == 3.0);                                  // char length
    CHECK(x[2] == doctest::Approx(std::log(1000.0)));    // ln(1+999)
    CHECK(x[6] == 3.0);                                  // phonemes
    CHECK(x[7] == 1.0);                                  // syllables

    // zero counts give zero log features; phonology falls back to medians
    auto z = fc.cost_features(2, 1850);  // "zero" has no series or dict entry
    for (size_t f = 1; f <= 5; ++f) CHECK(z[f] == 0.0);
    CHECK(z[6] == 3.0);  // median of {3 (pan), 3 (sauce)}
    CHECK(z[7] == 1.0);
}

TEST_CASE("batch assembly masks padded positions") {
    Fixture fx;
    FileProvider provider(fx.table);
    FeatureContext fc(fx.lex, provider);
    Vec c{1, 0, 0};

    std::vector<Candidate> pool{cand({0, 1}), cand({2})};
    auto b = fc.assemble_batch(pool, 0, c, 1850);
    REQUIRE(b.n == 2);
    CHECK(b.gold_index == 0);
    CHECK(b.lengths[0] == 2);
    CHECK(b.mask_row(0)[0] == 1.0);
    CHECK(b.mask_row(0)[1] == 1.0);
    CHECK(b.mask_row(0)[2] == 0.0);
    for (size_t f = 0; f < kCostDim; ++f) CHECK(b.cost_row(0, 2)[f] == 0.0);

    // recomputation is bit-identical
    auto b2 = fc.assemble_batch(pool, 0, c, 1850);
    CHECK(b.sem == b2.sem);
    CHECK(b.cost == b2.cost);
    CHECK(b.mask == b2.mask);

    // single-candidate pool
    auto b1 = fc.assemble_batch({cand({0})}, 0, c, 1850);
    CHECK(b1.n == 1);
    CHECK(b1.gold_index == 0);

    // dump carries one row per candidate
    auto tsv = feature_dump_tsv(b);
    size_t rows = 0;
    for (char ch : tsv)
        if (ch == '\n') ++rows;
    CHECK(rows == 3);  // header + 2
}
