#include <cmath>

#include "doctest.h"
#include "morphorank/models.hpp"
#include "support/synthetic.hpp"
#include "support/util.hpp"

using namespace morphorank;
using testutil::TempDir;

namespace {

// softplus^-1: raw value whose softplus equals y
double raw_for(double y) { return std::log(std::exp(y) - 1.0); }

std::vector<size_t> argsort_desc(const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] > v[b]; });
    return idx;
}

}  // namespace

TEST_CASE("normalize_pool_scores oracles") {
    auto z = normalize_pool_scores({1, 2, 3});
    CHECK(z[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(z[1] == doctest::Approx(0.0));
    CHECK(z[2] == doctest::Approx(1.2247).epsilon(1e-4));

    auto flat = normalize_pool_scores({4, 4, 4, 4});
    for (double v : flat) CHECK(v == doctest::Approx(0.0));

    // invariant under positive affine transforms of the input
    std::vector<double> raw{0.3, -1.2, 2.2, 0.0};
    auto a = normalize_pool_scores(raw);
    std::vector<double> shifted;
    for (double v : raw) shifted.push_back(2.5 * v + 7.0);
    auto b = normalize_pool_scores(shifted);
    for (size_t i = 0; i < raw.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));
}

TEST_CASE("pairwise softplus loss oracles") {
    auto equal = pairwise_softplus_loss({1.0, 1.0}, 0, {1});
    CHECK(equal.loss == doctest::Approx(std::log(2.0)));

    auto sat = pairwise_softplus_loss({21.0, 1.0}, 0, {1});
    CHECK(sat.loss < 1e-8);

    auto behind = pairwise_softplus_loss({0.0, 1.0}, 0, {1});
    CHECK(behind.loss == doctest::Approx(1.3133).epsilon(1e-4));

    // gradients: gold pushed up, negatives down, averaged over K
    auto multi = pairwise_softplus_loss({0.0, 1.0, 2.0}, 0, {1, 2});
    CHECK(multi.dscore[0] < 0);
    CHECK(multi.dscore[1] > 0);
    CHECK(multi.dscore[2] > 0);
    CHECK(multi.dscore[0] == doctest::Approx(-(multi.dscore[1] + multi.dscore[2])));
}

TEST_CASE("cost model: zero net, gamma scaling, hand oracle") {
    ModelSizes sizes;
    sizes.cost_dims = {kCostDim, 1};  // single affine layer: h(x) = Wx + b
    auto model = make_model(Family::cost_only, sizes, 42);

    Rng rng(1);
    auto batch = synth::random_batch(6, rng);

    // all-zero parameters (including gamma_raw: softplus(0) > 0 but the sum is 0)
    std::vector<double> zero(model->flat_params().size(), 0.0);
    model->set_flat_params(zero);
    for (double s : model->score(batch)) CHECK(s == 0.0);

    // hand-set: W = ones, b = 0, gamma = 1 -> score = -sum over positions of sum(x)
    std::vector<double> p(zero);
    for (size_t f = 0; f < kCostDim; ++f) p[f] = 1.0;
    p.back() = raw_for(1.0);
    model->set_flat_params(p);
    auto s1 = model->score(batch);
    for (size_t i = 0; i < batch.n; ++i) {
        double expect = 0;
        for (size_t pos = 0; pos < kMaxPositions; ++pos)
            for (size_t f = 0; f < kCostDim; ++f) expect += batch.cost[(i * kMaxPositions + pos) * kCostDim + f];
        CHECK(s1[i] == doctest::Approx(-expect));
    }

    // doubling gamma doubles scores, argmax unchanged
    p.back() = raw_for(2.0);
    model->set_flat_params(p);
    auto s2 = model->score(batch);
    for (size_t i = 0; i < batch.n; ++i) CHECK(s2[i] == doctest::Approx(2.0 * s1[i]));
    CHECK(argsort_desc(s1)[0] == argsort_desc(s2)[0]);
}

TEST_CASE("cost model ignores masked positions") {
    ModelSizes sizes;
    auto model = make_model(Family::cost_only, sizes, 3);
    Rng rng(2);
    auto batch = synth::random_batch(4, rng);
    auto before = model->score(batch);
    // poke garbage into a masked slot of a length-1 candidate
    for (size_t i = 0; i < batch.n; ++i) {
        if (batch.lengths[i] < 3) {
            batch.cost[(i * kMaxPositions + 2) * kCostDim + 0] = 1e6;
            break;
        }
    }
    auto after = model->score(batch);
    for (size_t i = 0; i < batch.n; ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("semantic model: constant stats collapse, tau scaling") {
    ModelSizes sizes;
    auto model = make_model(Family::semantic_only, sizes, 7);

    FeatureBatch b;
    b.n = 2;
    b.sem = {0.4, 0.4, 0.4, 0.4, 0.4, -1.5, -1.5, -1.5, -1.5, -1.5};
    b.cost.assign(b.n * kMaxPositions * kCostDim, 0.0);
    b.mask.assign(b.n * kMaxPositions, 0.0);
    b.mask[0] = b.mask[kMaxPositions] = 1.0;
    b.lengths = {1, 1};
    b.whole_fallback = {0, 0};

    // both rows are constant vectors -> identical normalized input -> equal scores
    auto s = model->score(b);
    CHECK(s[0] == doctest::Approx(s[1]));

    // halving tau doubles every score, order is unchanged
    Rng rng(8);
    auto rb = synth::random_batch(5, rng);
    auto params = model->flat_params();
    params.back() = raw_for(1.0);
    model->set_flat_params(params);
    auto s_tau1 = model->score(rb);
    params.back() = raw_for(0.5);
    model->set_flat_params(params);
    auto s_tau05 = model->score(rb);
    for (size_t i = 0; i < rb.n; ++i) CHECK(s_tau05[i] == doctest::Approx(2.0 * s_tau1[i]));
    CHECK(argsort_desc(s_tau1) == argsort_desc(s_tau05));
}

TEST_CASE("semantic model hand oracle on a tiny net") {
    ModelSizes sizes;
    sizes.sem_dims = {kSemDim, 1};  // affine head on the normalized stats
    auto model = make_model(Family::semantic_only, sizes, 1);
    // gain = 1, bias = 0, W = (1,0,0,0,0), b = 0, tau = 1
    std::vector<double> p(model->flat_params().size(), 0.0);
    for (size_t i = 0; i < kSemDim; ++i) p[i] = 1.0;  // LN gain
    p[2 * kSemDim + 0] = 1.0;                          // W[0]
    p.back() = raw_for(1.0);
    model->set_flat_params(p);

    FeatureBatch b;
    b.n = 1;
    b.sem = {1.0, 0.0, 0.0, 0.0, 0.0};
    b.cost.assign(kMaxPositions * kCostDim, 0.0);
    b.mask = {1, 0, 0};
    b.lengths = {1};
    b.whole_fallback = {0};

    // layer-norm by hand: mu = 0.2, var = 0.16, xhat[0] = 0.8 / 0.4 = 2
    auto s = model->score(b);
    CHECK(s[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("discriminative model: masked mean input, determinism") {
    ModelSizes sizes;
    auto model = make_model(Family::discriminative, sizes, 5);
    Rng rng(4);
    auto b = synth::random_batch(6, rng);

    // duplicate a row -> identical scores
    FeatureBatch dup = b;
    for (size_t f = 0; f < kSemDim; ++f) dup.sem[1 * kSemDim + f] = dup.sem[0 * kSemDim + f];
    for (size_t x = 0; x < kMaxPositions * kCostDim; ++x)
        dup.cost[1 * kMaxPositions * kCostDim + x] = dup.cost[0 * kMaxPositions * kCostDim + x];
    for (size_t x = 0; x < kMaxPositions; ++x) dup.mask[1 * kMaxPositions + x] = dup.mask[0 * kMaxPositions + x];
    dup.lengths[1] = dup.lengths[0];
    auto s = model->score(dup);
    CHECK(s[0] == doctest::Approx(s[1]));
}

TEST_CASE("discriminative hand oracle: affine net over 13 inputs") {
    ModelSizes sizes;
    sizes.disc_dims = {kSemDim + kCostDim, 1};
    auto model = make_model(Family::discriminative, sizes, 2);
    std::vector<double> p(model->flat_params().size(), 0.0);
    for (size_t i = 0; i < kSemDim + kCostDim; ++i) p[i] = 1.0;  // W = ones, b = 0
    model->set_flat_params(p);

    FeatureBatch b;
    b.n = 1;
    b.sem = {0.1, 0.2, 0.3, 0.4, 0.5};
    b.cost.assign(kMaxPositions * kCostDim, 0.0);
    for (size_t f = 0; f < kCostDim; ++f) {
        b.cost[f] = 1.0;              // position 0
        b.cost[kCostDim + f] = 3.0;   // position 1
    }
    b.mask = {1, 1, 0};
    b.lengths = {2};
    b.whole_fallback = {0};

    // input = sem ++ mean(position features) = sem ++ (2.0 x 8); sum = 1.5 + 16
    auto s = model->score(b);
    CHECK(s[0] == doctest::Approx(17.5));
}

namespace {

struct S1Fixture {
    std::shared_ptr<Model> base_cost, base_sem;
    FeatureBatch batch;

    S1Fixture() {
        ModelSizes sizes;
        sizes.cost_dims = {kCostDim, 1};
        sizes.sem_dims = {kSemDim, 1};
        auto c = make_model(Family::cost_only, sizes, 1);
        std::vector<double> cp(c->flat_params().size(), 0.0);
        for (size_t f = 0; f < kCostDim; ++f) cp[f] = 1.0;
        cp.back() = raw_for(1.0);
        c->set_flat_params(cp);

        auto s = make_model(Family::semantic_only, sizes, 1);
        std::vector<double> sp(s->flat_params().size(), 0.0);
        for (size_t i = 0; i < kSemDim; ++i) sp[i] = 1.0;
        sp[2 * kSemDim + 0] = 1.0;
        sp.back() = raw_for(1.0);
        s->set_flat_params(sp);

        base_cost = std::move(c);
        base_sem = std::move(s);

        // candidate 0: semantically close but expensive; candidate 1: cheap
        // but semantically off. Normalized base scores are exactly +-1.
        batch.n = 2;
        batch.sem = {1, 0, 0, 0, 0, 0, 1, 0, 0, 0};
        batch.cost.assign(2 * kMaxPositions * kCostDim, 0.0);
        for (size_t f = 0; f < kCostDim; ++f) batch.cost[f] = 1.0;  // candidate 0, position 0
        batch.mask = {1, 0, 0, 1, 0, 0};
        batch.lengths = {1, 1};
        batch.whole_fallback = {0, 0};
        batch.gold_index = 0;
    }
};

}  // namespace

TEST_CASE("linear S1 arithmetic and reductions") {
    S1Fixture fx;
    ModelSizes sizes;
    auto s1 = make_model(Family::s1_linear, sizes, 0, fx.base_cost, fx.base_sem);

    // candidate 0 has (s_sem, s_cost) = (1, -1)
    s1->set_flat_params({0.38, 0.48, 0.0});
    auto s = s1->score(fx.batch);
    CHECK(s[0] == doctest::Approx(-0.10));
    CHECK(s[1] == doctest::Approx(0.10));

    // w_cost = 0 reduces to the semantic-only ranking
    s1->set_flat_params({1.0, 0.0, 0.0});
    auto sem_rank = argsort_desc(fx.base_sem->score(fx.batch));
    CHECK(argsort_desc(s1->score(fx.batch)) == sem_rank);

    // w_sem = 0 reduces to the cost-only ranking
    s1->set_flat_params({0.0, 1.0, 0.0});
    auto cost_rank = argsort_desc(fx.base_cost->score(fx.batch));
    CHECK(argsort_desc(s1->score(fx.batch)) == cost_rank);
}

TEST_CASE("nonlinear S1 zero-initialized output gives a uniform ranking") {
    S1Fixture fx;
    ModelSizes sizes;
    auto s1 = make_model(Family::s1_nonlinear, sizes, 9, fx.base_cost, fx.base_sem);
    std::vector<double> zero(s1->flat_params().size(), 0.0);
    s1->set_flat_params(zero);
    auto s = s1->score(fx.batch);
    CHECK(s[0] == doctest::Approx(s[1]));
}

TEST_CASE("S1 refuses to score when a frozen base changed") {
    S1Fixture fx;
    ModelSizes sizes;
    auto s1 = make_model(Family::s1_linear, sizes, 0, fx.base_cost, fx.base_sem);
    s1->set_flat_params({0.5, 0.5, 0.0});
    CHECK_NOTHROW(s1->score(fx.batch));

    auto mutated = fx.base_cost->flat_params();
    mutated[0] += 1.0;
    fx.base_cost->set_flat_params(mutated);
    CHECK_THROWS_AS(s1->score(fx.batch), std::logic_error);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    TempDir tmp("ckpt");
    ModelSizes sizes;
    auto model = make_model(Family::discriminative, sizes, 77);
    auto ckpt = checkpoint_from_model(*model, {{"note", "test"}}, 77, 12, 0.25);

    auto p1 = tmp.path / "m.ckpt";
    save_checkpoint(p1, ckpt);
    auto back = load_checkpoint(p1);
    CHECK(back.family == "discriminative");
    CHECK(back.params == ckpt.params);  // exact doubles
    CHECK(back.seed == 77);
    CHECK(back.epochs == 12);
    CHECK(back.best_val_mrr == 0.25);
    CHECK(back.config.at("note") == "test");

    auto p2 = tmp.path / "m2.ckpt";
    save_checkpoint(p2, back);
    CHECK(read_file_bytes(p1) == read_file_bytes(p2));

    // rebuilt model scores identically
    auto rebuilt = model_from_checkpoint(back);
    Rng rng(6);
    auto b = synth::random_batch(5, rng);
    CHECK(model->score(b) == rebuilt->score(b));
}

TEST_CASE("corrupted checkpoint params fail the hash check") {
    TempDir tmp("ckpt_bad");
    ModelSizes sizes;
    auto model = make_model(Family::cost_only, sizes, 1);
    auto ckpt = checkpoint_from_model(*model, {}, 1, 1, 0.0);
    auto p = tmp.path / "m.ckpt";
    save_checkpoint(p, ckpt);

    auto bytes = read_file_bytes(p);
    bytes[bytes.size() / 2] ^= 0xff;
    auto p2 = tmp.path / "bad.ckpt";
    write_file_bytes(p2, bytes);
    CHECK_THROWS_AS(load_checkpoint(p2), LoadError);
}

TEST_CASE("S1 checkpoints verify base hashes on reload") {
    S1Fixture fx;
    TempDir tmp("s1ckpt");
    ModelSizes sizes;
    auto s1 = make_model(Family::s1_linear, sizes, 0, fx.base_cost, fx.base_sem);
    s1->set_flat_params({0.3, 0.2, 0.1});
    auto ckpt = checkpoint_from_model(*s1, {}, 0, 5, 0.5);
    auto p = tmp.path / "s1.ckpt";
    save_checkpoint(p, ckpt);

    // right bases: fine
    CHECK_NOTHROW(model_from_checkpoint(load_checkpoint(p), fx.base_cost, fx.base_sem));

    // different bases: refused
    auto other = std::shared_ptr<Model>(make_model(Family::cost_only, ModelSizes{}, 123));
    CHECK_THROWS_AS(model_from_checkpoint(load_checkpoint(p), std::move(other), fx.base_sem), LoadError);
}

TEST_CASE("param_hash is order- and value-sensitive") {
    CHECK(param_hash({1.0, 2.0}) != param_hash({2.0, 1.0}));
    CHECK(param_hash({1.0, 2.0}) != param_hash({1.0, 2.0 + 1e-15}));
    CHECK(param_hash({1.0, 2.0}) == param_hash({1.0, 2.0}));
}
