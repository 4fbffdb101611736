#pragma once
// The five scoring families over FeatureBatch inputs, with exact analytic
// gradients, plus the pairwise ranking loss and checkpoint container.

#include <map>
#include <memory>

#include "morphorank/features.hpp"
#include "morphorank/nn.hpp"

namespace morphorank {

enum class Family { cost_only, semantic_only, discriminative, s1_linear, s1_nonlinear };

const char* family_name(Family f);
std::optional<Family> parse_family(std::string_view name);
const std::vector<Family>& all_families();

struct ParamInfo {
    std::string name;
    std::vector<size_t> shape;
    size_t offset = 0;
    size_t size = 0;
};

struct ModelSizes {
    std::vector<size_t> cost_dims{kCostDim, 16, 1};
    std::vector<size_t> sem_dims{kSemDim, 32, 16, 1};
    std::vector<size_t> disc_dims{kSemDim + kCostDim, 64, 32, 1};
    std::vector<size_t> s1_dims{2, 8, 1};
};

uint64_t param_hash(const std::vector<double>& params);

// Z-score over candidates within one pool; population std floored at 1e-6.
std::vector<double> normalize_pool_scores(const std::vector<double>& raw);

class Model {
public:
    virtual ~Model() = default;
    virtual Family family() const = 0;
    virtual std::vector<double> score(const FeatureBatch& batch) const = 0;
    // Accumulates d(sum_i dscore[i] * score_i)/dparams into gparams
    // (resized/zero-padded by the caller to flat_params().size()).
    virtual void backward(const FeatureBatch& batch, const std::vector<double>& dscore,
                          std::vector<double>& gparams) const = 0;
    virtual const std::vector<double>& flat_params() const = 0;
    virtual void set_flat_params(const std::vector<double>& p) = 0;
    virtual std::vector<ParamInfo> layout() const = 0;
    virtual std::map<std::string, std::string> structure() const = 0;  // dims etc., for checkpoints
};

// S1 families need both frozen bases; the others ignore them.
std::unique_ptr<Model> make_model(Family f, const ModelSizes& sizes, uint64_t init_seed,
                                  std::shared_ptr<const Model> base_cost = nullptr,
                                  std::shared_ptr<const Model> base_sem = nullptr);

// ---------------------------------------------------------------------------
// Loss

struct PairwiseLoss {
    double loss = 0;
    std::vector<double> dscore;  // same length as the score vector
};

// loss = (1/K) sum_k softplus(s_k - s_gold) over the given negatives.
PairwiseLoss pairwise_softplus_loss(const std::vector<double>& scores, size_t gold_index,
                                    const std::vector<size_t>& negative_indices);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
    std::string family;
    std::vector<ParamInfo> layout;
    std::vector<double> params;
    std::map<std::string, std::string> config;  // structure + training config snapshot
    uint64_t seed = 0;
    int64_t epochs = 0;
    double best_val_mrr = 0;
    uint64_t hash = 0;  // param_hash(params), recomputed on save
};

Checkpoint checkpoint_from_model(const Model& model, std::map<std::string, std::string> extra_config,
                                 uint64_t seed, int64_t epochs, double best_val_mrr);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_manifest(const Checkpoint& ckpt);

// Rebuilds a model from a checkpoint; S1 families require the bases used
// at training time (hashes are verified on scoring).
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt,
                                             std::shared_ptr<const Model> base_cost = nullptr,
                                             std::shared_ptr<const Model> base_sem = nullptr);

}  // namespace morphorank
