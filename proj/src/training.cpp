#include "morphorank/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace morphorank {

Split year_stratified_split(const Dataset& dataset, const SplitSpec& spec) {
    if (dataset.items.empty()) throw std::invalid_argument("year_stratified_split: empty dataset");
    if (spec.n_folds < 2) throw std::invalid_argument("year_stratified_split: need >= 2 folds");
    if (spec.fold_index < 0 || spec.fold_index >= spec.n_folds)
        throw std::invalid_argument("year_stratified_split: fold_index out of range");

    std::map<int, std::vector<size_t>> by_year;
    for (size_t i = 0; i < dataset.items.size(); ++i) by_year[dataset.items[i].emergence_year].push_back(i);

    Split out;
    Rng rng(spec.seed);
    for (auto& [year, ids] : by_year) {
        rng.shuffle(ids);
        size_t n = ids.size();
        size_t n_test = 0;
        if (n >= 3) n_test = std::max<size_t>(1, static_cast<size_t>(std::llround(spec.test_fraction * n)));
        for (size_t i = 0; i < n_test; ++i) out.test.push_back(ids[i]);
        size_t remaining = n - n_test;
        if (remaining == 1) {
            out.train.push_back(ids[n_test]);  // degenerate year: no validation either
            continue;
        }
        for (size_t i = 0; i < remaining; ++i) {
            size_t fold = i % static_cast<size_t>(spec.n_folds);
            if (fold == static_cast<size_t>(spec.fold_index))
                out.val.push_back(ids[n_test + i]);
            else
                out.train.push_back(ids[n_test + i]);
        }
    }
    return out;
}

std::vector<size_t> mine_negatives(size_t pool_size, size_t gold_index,
                                   const std::vector<double>& current_scores,
                                   const std::vector<uint8_t>& overlaps_gold, int epoch,
                                   const CurriculumSchedule& schedule, Rng& rng) {
    if (pool_size < 2) throw std::invalid_argument("mine_negatives: pool too small");
    std::vector<size_t> non_gold;
    non_gold.reserve(pool_size - 1);
    for (size_t i = 0; i < pool_size; ++i)
        if (i != gold_index) non_gold.push_back(i);

    size_t k = static_cast<size_t>(schedule.negatives);
    if (non_gold.size() <= k) return non_gold;

    // top quartile by current model score
    std::vector<size_t> by_score = non_gold;
    std::stable_sort(by_score.begin(), by_score.end(),
                     [&](size_t a, size_t b) { return current_scores[a] > current_scores[b]; });
    size_t q = std::max<size_t>(1, non_gold.size() / 4);
    by_score.resize(q);

    double hf = schedule.hard_fraction(epoch);
    std::vector<uint8_t> drawn(pool_size, 0);
    std::vector<size_t> out;
    out.reserve(k);
    auto weighted_draw = [&](const std::vector<size_t>& cands) -> std::optional<size_t> {
        double total = 0;
        for (size_t i : cands) {
            if (drawn[i]) continue;
            total += overlaps_gold[i] ? schedule.overlap_boost : 1.0;
        }
        if (total <= 0) return std::nullopt;
        double r = rng.uniform() * total;
        double cum = 0;
        for (size_t i : cands) {
            if (drawn[i]) continue;
            cum += overlaps_gold[i] ? schedule.overlap_boost : 1.0;
            if (r < cum) return i;
        }
        // numeric edge: fall back to the last undrawn candidate
        for (auto it = cands.rbegin(); it != cands.rend(); ++it)
            if (!drawn[*it]) return *it;
        return std::nullopt;
    };
    for (size_t slot = 0; slot < k; ++slot) {
        bool hard = rng.bernoulli(hf);
        auto pick = weighted_draw(hard ? by_score : non_gold);
        if (!pick) pick = weighted_draw(hard ? non_gold : by_score);
        if (!pick) break;
        drawn[*pick] = 1;
        out.push_back(*pick);
    }
    return out;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    double norm2 = 0;
    for (double g : grads) {
        if (!std::isfinite(g)) throw NonFiniteGradient();
        norm2 += g * g;
    }
    double norm = std::sqrt(norm2);
    double scale = (state.clip_norm > 0 && norm > state.clip_norm) ? state.clip_norm / norm : 1.0;
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        double g = grads[i] * scale;
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g * g;
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

std::map<std::string, std::string> TrainConfig::snapshot() const {
    std::map<std::string, std::string> s;
    s["epochs"] = std::to_string(epochs);
    s["patience"] = std::to_string(patience);
    s["lr"] = format_double(lr);
    s["clip_norm"] = format_double(clip_norm);
    s["negatives"] = std::to_string(curriculum.negatives);
    s["hard_fraction_max"] = format_double(curriculum.hard_fraction_max);
    s["ramp_epochs"] = std::to_string(curriculum.ramp_epochs);
    s["overlap_boost"] = format_double(curriculum.overlap_boost);
    s["train_seed"] = std::to_string(seed);
    return s;
}

namespace {

double items_mean_mrr(const Model& model, const std::vector<const RankItem*>& items) {
    if (items.empty()) return 0.0;
    double s = 0;
    for (const RankItem* item : items) {
        auto scores = model.score(item->batch);
        s += 1.0 / static_cast<double>(rank_gold(scores, item->batch.gold_index));
    }
    return s / static_cast<double>(items.size());
}

std::vector<const RankItem*> usable(const std::vector<RankItem>& items) {
    std::vector<const RankItem*> out;
    for (const auto& item : items)
        if (!item.gold_gated_out && item.batch.n >= 2) out.push_back(&item);
    return out;
}

}  // namespace

TrainResult train_family(Family family, const std::vector<RankItem>& train_items,
                         const std::vector<RankItem>& val_items, const TrainConfig& config,
                         std::shared_ptr<const Model> base_cost, std::shared_ptr<const Model> base_sem) {
    auto t0 = std::chrono::steady_clock::now();
    bool is_s1 = family == Family::s1_linear || family == Family::s1_nonlinear;
    if (is_s1 && (!base_cost || !base_sem)) {
        std::string missing;
        if (!base_cost) missing += " cost";
        if (!base_sem) missing += " semantic";
        throw ConfigError(std::string("training ") + family_name(family) +
                          " requires frozen base checkpoints; missing:" + missing);
    }

    CurriculumSchedule sched = config.curriculum;
    if (sched.ramp_epochs <= 0) sched.ramp_epochs = std::max(1, config.epochs / 2);
    if (sched.negatives < 1) throw ConfigError("negatives must be >= 1");

    uint64_t run_seed = splitmix64(config.seed ^ fnv1a(family_name(family)));
    Rng rng(run_seed);
    auto model = make_model(family, config.sizes, splitmix64(run_seed), base_cost, base_sem);

    auto train = usable(train_items);
    auto val = usable(val_items);
    if (train.empty()) throw ConfigError("no usable training items");

    AdamState adam;
    adam.lr = config.lr;
    adam.clip_norm = config.clip_norm;
    adam.init(model->flat_params().size());

    TrainRunReport report;
    std::vector<double> best_params = model->flat_params();
    double best_metric = -1;
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<size_t> order(train.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);

        double train_rr = 0;
        bool aborted = false;
        for (size_t idx : order) {
            const RankItem& item = *train[idx];
            auto scores = model->score(item.batch);
            train_rr += 1.0 / static_cast<double>(rank_gold(scores, item.batch.gold_index));
            auto negs = mine_negatives(item.batch.n, item.batch.gold_index, scores, item.overlaps_gold,
                                       epoch, sched, rng);
            if (negs.empty()) continue;
            auto loss = pairwise_softplus_loss(scores, item.batch.gold_index, negs);
            std::vector<double> grads(model->flat_params().size(), 0.0);
            model->backward(item.batch, loss.dscore, grads);
            std::vector<double> params = model->flat_params();
            try {
                adam_step(params, grads, adam);
            } catch (const NonFiniteGradient&) {
                report.stopping_reason = "non-finite gradient at epoch " + std::to_string(epoch);
                aborted = true;
                break;
            }
            model->set_flat_params(params);
        }
        if (aborted) break;

        report.train_mrr.push_back(train_rr / static_cast<double>(train.size()));
        double val_mrr = val.empty() ? report.train_mrr.back() : items_mean_mrr(*model, val);
        report.val_mrr.push_back(val_mrr);

        if (val_mrr > best_metric) {
            best_metric = val_mrr;
            report.best_epoch = epoch;
            best_params = model->flat_params();
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best > config.patience) {
                report.stopping_reason = "early stopping (patience " + std::to_string(config.patience) + ")";
                break;
            }
        }
    }
    if (report.stopping_reason.empty()) report.stopping_reason = "max epochs";
    report.best_val_mrr = std::max(best_metric, 0.0);

    model->set_flat_params(best_params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrainResult result;
    result.checkpoint = checkpoint_from_model(*model, config.snapshot(), config.seed,
                                              report.best_epoch + 1, report.best_val_mrr);
    result.report = std::move(report);
    result.model = std::move(model);
    return result;
}

std::vector<TemporalWindowResult> temporal_window_runs(const std::vector<RankItem>& train_items,
                                                       const std::vector<RankItem>& val_items,
                                                       const std::vector<RankItem>& test_items,
                                                       const std::vector<int>& end_years,
                                                       const TrainConfig& config, size_t eval_n_max) {
    for (size_t i = 1; i < end_years.size(); ++i)
        if (end_years[i] <= end_years[i - 1])
            throw std::invalid_argument("temporal_window_runs: end_years must be ascending");

    std::vector<TemporalWindowResult> out;
    for (int end_year : end_years) {
        TemporalWindowResult win;
        win.end_year = end_year;
        auto filter = [&](const std::vector<RankItem>& items) {
            std::vector<RankItem> kept;
            for (const auto& it : items)
                if (it.year <= end_year) kept.push_back(it);
            return kept;
        };
        auto tr = filter(train_items);
        auto va = filter(val_items);
        auto te = filter(test_items);
        win.train_items = tr.size();
        if (tr.size() < 20) {
            win.skipped = true;
            out.push_back(std::move(win));
            continue;
        }
        auto cost = train_family(Family::cost_only, tr, va, config);
        auto sem = train_family(Family::semantic_only, tr, va, config);
        std::shared_ptr<const Model> base_cost = std::move(cost.model);
        std::shared_ptr<const Model> base_sem = std::move(sem.model);
        std::map<std::string, std::unique_ptr<Model>> trained;
        trained[family_name(Family::discriminative)] =
            train_family(Family::discriminative, tr, va, config).model;
        trained[family_name(Family::s1_linear)] =
            train_family(Family::s1_linear, tr, va, config, base_cost, base_sem).model;
        trained[family_name(Family::s1_nonlinear)] =
            train_family(Family::s1_nonlinear, tr, va, config, base_cost, base_sem).model;

        auto eval_one = [&](const Model& m) { return evaluate(m, te, eval_n_max, config.seed).report; };
        win.reports[family_name(Family::cost_only)] = eval_one(*base_cost);
        win.reports[family_name(Family::semantic_only)] = eval_one(*base_sem);
        for (const auto& [name, m] : trained) win.reports[name] = eval_one(*m);
        out.push_back(std::move(win));
    }
    return out;
}

std::string train_report_tsv(const TrainRunReport& report) {
    std::ostringstream out;
    out << "epoch\ttrain_mrr\tval_mrr\n";
    for (size_t e = 0; e < report.train_mrr.size(); ++e)
        out << e << '\t' << format_double(report.train_mrr[e]) << '\t' << format_double(report.val_mrr[e])
            << '\n';
    out << "# best_epoch\t" << report.best_epoch << '\n';
    out << "# best_val_mrr\t" << format_double(report.best_val_mrr) << '\n';
    out << "# stopping_reason\t" << report.stopping_reason << '\n';
    return out.str();
}

}  // namespace morphorank
