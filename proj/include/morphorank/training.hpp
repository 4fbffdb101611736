#pragma once
// Year-stratified splitting, curriculum hard-negative mining, Adam with
// gradient clipping and early stopping, and the two-stage training
// schedule (frozen bases first, then S1).

#include "morphorank/eval.hpp"
#include "morphorank/models.hpp"
#include "morphorank/rank_item.hpp"

namespace morphorank {

struct SplitSpec {
    double test_fraction = 0.2;
    int n_folds = 5;
    int fold_index = 0;
    uint64_t seed = 0;
};

struct Split {
    std::vector<size_t> train, val, test;  // dataset item indices
};

// Per year: shuffle, hold out round(0.2 n) for test (>=1 when n >= 3, else
// 0), deal the remainder round-robin into 5 folds; fold_index is validation.
// A year whose remainder is a single item sends it to training.
Split year_stratified_split(const Dataset& dataset, const SplitSpec& spec);

struct CurriculumSchedule {
    int negatives = 16;              // K
    double hard_fraction_max = 0.8;
    int ramp_epochs = 0;             // 0 -> epochs_total / 2, resolved by the trainer
    double overlap_boost = 2.0;

    double hard_fraction(int epoch) const {
        if (ramp_epochs <= 0) return epoch > 0 ? hard_fraction_max : 0.0;
        double f = hard_fraction_max * static_cast<double>(epoch) / ramp_epochs;
        return std::min(f, hard_fraction_max);
    }
};

// K negative candidate indices, without replacement. Hard draws come from
// the top quartile by current score; all draws are reweighted by
// overlap_boost when the candidate shares a morpheme with gold.
std::vector<size_t> mine_negatives(size_t pool_size, size_t gold_index,
                                   const std::vector<double>& current_scores,
                                   const std::vector<uint8_t>& overlaps_gold, int epoch,
                                   const CurriculumSchedule& schedule, Rng& rng);

struct AdamState {
    std::vector<double> m, v;
    int64_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double clip_norm = 1.0;

    void init(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        step = 0;
    }
};

struct NonFiniteGradient : std::runtime_error {
    NonFiniteGradient() : std::runtime_error("non-finite gradient") {}
};

// Global-norm clip, then standard Adam with bias correction. Throws
// NonFiniteGradient on NaN/Inf gradients.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state);

struct TrainConfig {
    int epochs = 60;
    int patience = 10;
    double lr = 1e-3;
    double clip_norm = 1.0;
    CurriculumSchedule curriculum;
    uint64_t seed = 0;
    ModelSizes sizes;

    std::map<std::string, std::string> snapshot() const;
};

struct TrainRunReport {
    std::vector<double> train_mrr, val_mrr;  // per epoch
    int best_epoch = -1;
    double best_val_mrr = 0;
    std::string stopping_reason;
    double wall_seconds = 0;  // diagnostic only, never serialized into artifacts
};

struct TrainResult {
    std::unique_ptr<Model> model;
    Checkpoint checkpoint;
    TrainRunReport report;
};

// Trains one family. S1 families require both frozen bases.
TrainResult train_family(Family family, const std::vector<RankItem>& train_items,
                         const std::vector<RankItem>& val_items, const TrainConfig& config,
                         std::shared_ptr<const Model> base_cost = nullptr,
                         std::shared_ptr<const Model> base_sem = nullptr);

struct TemporalWindowResult {
    int end_year = 0;
    bool skipped = false;
    size_t train_items = 0;
    std::map<std::string, MetricsReport> reports;  // per family
};

// Cumulative-window sweep: for each end year Y, restrict train/val/test to
// items with year <= Y and retrain all five families. Windows with fewer
// than 20 training items are skipped.
std::vector<TemporalWindowResult> temporal_window_runs(const std::vector<RankItem>& train_items,
                                                       const std::vector<RankItem>& val_items,
                                                       const std::vector<RankItem>& test_items,
                                                       const std::vector<int>& end_years,
                                                       const TrainConfig& config, size_t eval_n_max);

std::string train_report_tsv(const TrainRunReport& report);

}  // namespace morphorank
