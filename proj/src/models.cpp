#include "morphorank/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace morphorank {

namespace {
// raw value whose softplus is exactly 1, so gamma/tau start at 1
const double kRawUnit = std::log(std::exp(1.0) - 1.0);

std::string dims_to_string(const std::vector<size_t>& dims) {
    std::string s;
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(dims[i]);
    }
    return s;
}

std::vector<size_t> dims_from_string(const std::string& s) {
    std::vector<size_t> dims;
    for (const auto& part : split(s, ',')) {
        auto v = parse_long(trim(part));
        if (!v || *v <= 0) throw LoadError("bad dims string: " + s);
        dims.push_back(static_cast<size_t>(*v));
    }
    return dims;
}

void append_net_layout(std::vector<ParamInfo>& out, const std::string& prefix, const std::vector<size_t>& dims,
                       size_t base_offset) {
    size_t off = base_offset;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        size_t in = dims[l], out_d = dims[l + 1];
        out.push_back(ParamInfo{prefix + ".W" + std::to_string(l), {out_d, in}, off, out_d * in});
        off += out_d * in;
        out.push_back(ParamInfo{prefix + ".b" + std::to_string(l), {out_d}, off, out_d});
        off += out_d;
    }
}
}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::cost_only: return "cost";
        case Family::semantic_only: return "semantic";
        case Family::discriminative: return "discriminative";
        case Family::s1_linear: return "s1-linear";
        case Family::s1_nonlinear: return "s1-nonlinear";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : all_families())
        if (name == family_name(f)) return f;
    return std::nullopt;
}

const std::vector<Family>& all_families() {
    static const std::vector<Family> fams{Family::cost_only, Family::semantic_only, Family::discriminative,
                                          Family::s1_linear, Family::s1_nonlinear};
    return fams;
}

uint64_t param_hash(const std::vector<double>& params) {
    uint64_t h = kFnvOffset;
    for (double v : params) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char le[8];
        for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(bits >> (8 * i));
        h = fnv1a(le, 8, h);
    }
    return h;
}

std::vector<double> normalize_pool_scores(const std::vector<double>& raw) {
    if (raw.empty()) throw std::invalid_argument("normalize_pool_scores: empty pool");
    double mu = 0;
    for (double v : raw) mu += v;
    mu /= static_cast<double>(raw.size());
    double var = 0;
    for (double v : raw) var += (v - mu) * (v - mu);
    var /= static_cast<double>(raw.size());
    double sd = std::max(std::sqrt(var), 1e-6);
    std::vector<double> out(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mu) / sd;
    return out;
}

PairwiseLoss pairwiseLossImpl(const std::vector<double>& scores, size_t gold_index,
                              const std::vector<size_t>& negative_indices) {
    if (negative_indices.empty()) throw std::invalid_argument("pairwise loss needs >= 1 negative");
    PairwiseLoss out;
    out.dscore.assign(scores.size(), 0.0);
    double k = static_cast<double>(negative_indices.size());
    double s_gold = scores[gold_index];
    for (size_t idx : negative_indices) {
        double d = scores[idx] - s_gold;
        out.loss += softplus(d) / k;
        double g = sigmoid(d) / k;
        out.dscore[idx] += g;
        out.dscore[gold_index] -= g;
    }
    return out;
}

PairwiseLoss pairwise_softplus_loss(const std::vector<double>& scores, size_t gold_index,
                                    const std::vector<size_t>& negative_indices) {
    return pairwiseLossImpl(scores, gold_index, negative_indices);
}

// ---------------------------------------------------------------------------
// Cost model: score = -gamma * sum over unmasked positions of h(x)

class CostModel : public Model {
public:
    CostModel(const std::vector<size_t>& dims, uint64_t seed) {
        Rng rng(seed);
        net_ = DenseNet::create(dims, rng);
        params_ = net_.params;
        params_.push_back(kRawUnit);  // gamma_raw
        sync();
    }

    Family family() const override { return Family::cost_only; }

    std::vector<double> score(const FeatureBatch& b) const override {
        std::vector<double> out(b.n);
        double gamma = softplus(params_.back());
        for (size_t i = 0; i < b.n; ++i) {
            double sum = 0;
            for (size_t p = 0; p < kMaxPositions; ++p) {
                if (b.mask[i * kMaxPositions + p] == 0.0) continue;
                sum += net_.forward1(b.cost_row(i, p));
            }
            out[i] = -gamma * sum;
        }
        return out;
    }

    void backward(const FeatureBatch& b, const std::vector<double>& dscore,
                  std::vector<double>& gparams) const override {
        double gamma_raw = params_.back();
        double gamma = softplus(gamma_raw);
        double dgamma = 0;
        for (size_t i = 0; i < b.n; ++i) {
            if (dscore[i] == 0.0) continue;
            double sum = 0;
            for (size_t p = 0; p < kMaxPositions; ++p) {
                if (b.mask[i * kMaxPositions + p] == 0.0) continue;
                DenseNet::Trace tr;
                sum += net_.forward1(b.cost_row(i, p), &tr);
                net_.backward1(tr, dscore[i] * -gamma, gparams.data());
            }
            dgamma += dscore[i] * -sum;
        }
        gparams.back() += dgamma * sigmoid(gamma_raw);
    }

    const std::vector<double>& flat_params() const override { return params_; }
    void set_flat_params(const std::vector<double>& p) override {
        if (p.size() != params_.size()) throw std::invalid_argument("cost model: param size mismatch");
        params_ = p;
        sync();
    }
    std::vector<ParamInfo> layout() const override {
        std::vector<ParamInfo> out;
        append_net_layout(out, "net", net_.dims, 0);
        out.push_back(ParamInfo{"gamma_raw", {1}, params_.size() - 1, 1});
        return out;
    }
    std::map<std::string, std::string> structure() const override {
        return {{"dims", dims_to_string(net_.dims)}};
    }

private:
    void sync() { net_.params.assign(params_.begin(), params_.end() - 1); }
    DenseNet net_;
    std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Semantic model: score = f(LN(s)) / tau

class SemanticModel : public Model {
public:
    SemanticModel(const std::vector<size_t>& dims, uint64_t seed) {
        if (dims.front() != kSemDim) throw std::invalid_argument("semantic model input dim must be 5");
        Rng rng(seed);
        net_ = DenseNet::create(dims, rng);
        params_.assign(kSemDim, 1.0);            // LN gain
        params_.insert(params_.end(), kSemDim, 0.0);  // LN bias
        params_.insert(params_.end(), net_.params.begin(), net_.params.end());
        params_.push_back(kRawUnit);  // tau_raw
        sync();
    }

    Family family() const override { return Family::semantic_only; }

    std::vector<double> score(const FeatureBatch& b) const override {
        std::vector<double> out(b.n);
        double tau = softplus(params_.back());
        LayerNorm ln{kSemDim};
        double z[kSemDim];
        for (size_t i = 0; i < b.n; ++i) {
            ln.forward(b.sem_row(i), params_.data(), z);
            out[i] = net_.forward1(z) / tau;
        }
        return out;
    }

    void backward(const FeatureBatch& b, const std::vector<double>& dscore,
                  std::vector<double>& gparams) const override {
        double tau_raw = params_.back();
        double tau = softplus(tau_raw);
        LayerNorm ln{kSemDim};
        double dtau = 0;
        size_t net_off = 2 * kSemDim;
        for (size_t i = 0; i < b.n; ++i) {
            if (dscore[i] == 0.0) continue;
            LayerNorm::Trace ltr;
            double z[kSemDim];
            ln.forward(b.sem_row(i), params_.data(), z, &ltr);
            DenseNet::Trace tr;
            double y = net_.forward1(z, &tr);
            dtau += dscore[i] * (-y / (tau * tau));
            double dz[kSemDim] = {0, 0, 0, 0, 0};
            net_.backward1(tr, dscore[i] / tau, gparams.data() + net_off, dz);
            double dx[kSemDim] = {0, 0, 0, 0, 0};
            ln.backward(ltr, params_.data(), dz, gparams.data(), dx);
        }
        gparams.back() += dtau * sigmoid(tau_raw);
    }

    const std::vector<double>& flat_params() const override { return params_; }
    void set_flat_params(const std::vector<double>& p) override {
        if (p.size() != params_.size()) throw std::invalid_argument("semantic model: param size mismatch");
        params_ = p;
        sync();
    }
    std::vector<ParamInfo> layout() const override {
        std::vector<ParamInfo> out;
        out.push_back(ParamInfo{"ln.gain", {kSemDim}, 0, kSemDim});
        out.push_back(ParamInfo{"ln.bias", {kSemDim}, kSemDim, kSemDim});
        append_net_layout(out, "net", net_.dims, 2 * kSemDim);
        out.push_back(ParamInfo{"tau_raw", {1}, params_.size() - 1, 1});
        return out;
    }
    std::map<std::string, std::string> structure() const override {
        return {{"dims", dims_to_string(net_.dims)}};
    }

private:
    void sync() {
        net_.params.assign(params_.begin() + 2 * kSemDim, params_.end() - 1);
    }
    DenseNet net_;
    std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Discriminative model: net over s(u,c) concat masked-mean cost features

class DiscriminativeModel : public Model {
public:
    DiscriminativeModel(const std::vector<size_t>& dims, uint64_t seed) {
        if (dims.front() != kSemDim + kCostDim)
            throw std::invalid_argument("discriminative model input dim must be 13");
        Rng rng(seed);
        net_ = DenseNet::create(dims, rng);
        params_ = net_.params;
    }

    Family family() const override { return Family::discriminative; }

    std::vector<double> score(const FeatureBatch& b) const override {
        std::vector<double> out(b.n);
        double in[kSemDim + kCostDim];
        for (size_t i = 0; i < b.n; ++i) {
            build_input(b, i, in);
            out[i] = net_.forward1(in);
        }
        return out;
    }

    void backward(const FeatureBatch& b, const std::vector<double>& dscore,
                  std::vector<double>& gparams) const override {
        double in[kSemDim + kCostDim];
        for (size_t i = 0; i < b.n; ++i) {
            if (dscore[i] == 0.0) continue;
            build_input(b, i, in);
            DenseNet::Trace tr;
            net_.forward1(in, &tr);
            net_.backward1(tr, dscore[i], gparams.data());
        }
    }

    const std::vector<double>& flat_params() const override { return params_; }
    void set_flat_params(const std::vector<double>& p) override {
        if (p.size() != params_.size()) throw std::invalid_argument("discriminative model: param size mismatch");
        params_ = p;
        net_.params = params_;
    }
    std::vector<ParamInfo> layout() const override {
        std::vector<ParamInfo> out;
        append_net_layout(out, "net", net_.dims, 0);
        return out;
    }
    std::map<std::string, std::string> structure() const override {
        return {{"dims", dims_to_string(net_.dims)}};
    }

private:
    static void build_input(const FeatureBatch& b, size_t i, double* in) {
        const double* s = b.sem_row(i);
        std::copy(s, s + kSemDim, in);
        double m = 0;
        double agg[kCostDim] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (size_t p = 0; p < kMaxPositions; ++p) {
            if (b.mask[i * kMaxPositions + p] == 0.0) continue;
            m += 1.0;
            const double* x = b.cost_row(i, p);
            for (size_t f = 0; f < kCostDim; ++f) agg[f] += x[f];
        }
        for (size_t f = 0; f < kCostDim; ++f) in[kSemDim + f] = m > 0 ? agg[f] / m : 0.0;
    }

    DenseNet net_;
    std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// S1: learned combination of frozen, pool-normalized base scores

class S1Model : public Model {
public:
    S1Model(bool nonlinear, const std::vector<size_t>& dims, uint64_t seed,
            std::shared_ptr<const Model> base_cost, std::shared_ptr<const Model> base_sem)
        : nonlinear_(nonlinear), base_cost_(std::move(base_cost)), base_sem_(std::move(base_sem)) {
        if (!base_cost_ || !base_sem_) throw std::invalid_argument("S1 model requires both base models");
        cost_hash_ = param_hash(base_cost_->flat_params());
        sem_hash_ = param_hash(base_sem_->flat_params());
        if (nonlinear_) {
            if (dims.front() != 2) throw std::invalid_argument("nonlinear S1 input dim must be 2");
            Rng rng(seed);
            net_ = DenseNet::create(dims, rng);
            params_ = net_.params;
        } else {
            params_ = {0.0, 0.0, 0.0};  // w_sem, w_cost, b
        }
    }

    Family family() const override { return nonlinear_ ? Family::s1_nonlinear : Family::s1_linear; }

    std::vector<double> score(const FeatureBatch& b) const override {
        auto [nc, ns] = base_inputs(b);
        std::vector<double> out(b.n);
        if (nonlinear_) {
            double in[2];
            for (size_t i = 0; i < b.n; ++i) {
                in[0] = nc[i];
                in[1] = ns[i];
                out[i] = net_.forward1(in);
            }
        } else {
            for (size_t i = 0; i < b.n; ++i) out[i] = params_[0] * ns[i] + params_[1] * nc[i] + params_[2];
        }
        return out;
    }

    void backward(const FeatureBatch& b, const std::vector<double>& dscore,
                  std::vector<double>& gparams) const override {
        auto [nc, ns] = base_inputs(b);
        if (nonlinear_) {
            double in[2];
            for (size_t i = 0; i < b.n; ++i) {
                if (dscore[i] == 0.0) continue;
                in[0] = nc[i];
                in[1] = ns[i];
                DenseNet::Trace tr;
                net_.forward1(in, &tr);
                net_.backward1(tr, dscore[i], gparams.data());
            }
        } else {
            for (size_t i = 0; i < b.n; ++i) {
                gparams[0] += dscore[i] * ns[i];
                gparams[1] += dscore[i] * nc[i];
                gparams[2] += dscore[i];
            }
        }
    }

    const std::vector<double>& flat_params() const override { return params_; }
    void set_flat_params(const std::vector<double>& p) override {
        if (p.size() != params_.size()) throw std::invalid_argument("S1 model: param size mismatch");
        params_ = p;
        if (nonlinear_) net_.params = params_;
    }
    std::vector<ParamInfo> layout() const override {
        std::vector<ParamInfo> out;
        if (nonlinear_) {
            append_net_layout(out, "net", net_.dims, 0);
        } else {
            out.push_back(ParamInfo{"w_sem", {1}, 0, 1});
            out.push_back(ParamInfo{"w_cost", {1}, 1, 1});
            out.push_back(ParamInfo{"bias", {1}, 2, 1});
        }
        return out;
    }
    std::map<std::string, std::string> structure() const override {
        std::map<std::string, std::string> s;
        s["variant"] = nonlinear_ ? "nonlinear" : "linear";
        if (nonlinear_) s["dims"] = dims_to_string(net_.dims);
        s["base_cost_hash"] = hex64(cost_hash_);
        s["base_sem_hash"] = hex64(sem_hash_);
        return s;
    }

    uint64_t cost_hash() const { return cost_hash_; }
    uint64_t sem_hash() const { return sem_hash_; }
    void expect_hashes(uint64_t cost_h, uint64_t sem_h) {
        cost_hash_ = cost_h;
        sem_hash_ = sem_h;
    }

private:
    std::pair<std::vector<double>, std::vector<double>> base_inputs(const FeatureBatch& b) const {
        if (param_hash(base_cost_->flat_params()) != cost_hash_ ||
            param_hash(base_sem_->flat_params()) != sem_hash_)
            throw std::logic_error("S1: frozen base checkpoint hash mismatch, refusing to score");
        return {normalize_pool_scores(base_cost_->score(b)), normalize_pool_scores(base_sem_->score(b))};
    }

    bool nonlinear_;
    std::shared_ptr<const Model> base_cost_, base_sem_;
    uint64_t cost_hash_ = 0, sem_hash_ = 0;
    DenseNet net_;
    std::vector<double> params_;
};

std::unique_ptr<Model> make_model(Family f, const ModelSizes& sizes, uint64_t init_seed,
                                  std::shared_ptr<const Model> base_cost,
                                  std::shared_ptr<const Model> base_sem) {
    switch (f) {
        case Family::cost_only: return std::make_unique<CostModel>(sizes.cost_dims, init_seed);
        case Family::semantic_only: return std::make_unique<SemanticModel>(sizes.sem_dims, init_seed);
        case Family::discriminative: return std::make_unique<DiscriminativeModel>(sizes.disc_dims, init_seed);
        case Family::s1_linear:
            return std::make_unique<S1Model>(false, sizes.s1_dims, init_seed, std::move(base_cost),
                                             std::move(base_sem));
        case Family::s1_nonlinear:
            return std::make_unique<S1Model>(true, sizes.s1_dims, init_seed, std::move(base_cost),
                                             std::move(base_sem));
    }
    throw std::logic_error("unknown family");
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr uint32_t kCkptMagic = 0x4b43524d;  // "MRCK"
constexpr uint32_t kCkptVersion = 1;
}  // namespace

Checkpoint checkpoint_from_model(const Model& model, std::map<std::string, std::string> extra_config,
                                 uint64_t seed, int64_t epochs, double best_val_mrr) {
    Checkpoint c;
    c.family = family_name(model.family());
    c.layout = model.layout();
    c.params = model.flat_params();
    c.config = model.structure();
    for (auto& [k, v] : extra_config) c.config[k] = v;
    c.seed = seed;
    c.epochs = epochs;
    c.best_val_mrr = best_val_mrr;
    c.hash = param_hash(c.params);
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    ByteWriter w;
    w.u32(kCkptMagic);
    w.u32(kCkptVersion);
    w.str(ckpt.family);
    w.u32(static_cast<uint32_t>(ckpt.layout.size()));
    for (const auto& p : ckpt.layout) {
        w.str(p.name);
        w.u32(static_cast<uint32_t>(p.shape.size()));
        for (size_t d : p.shape) w.u64(d);
        w.u64(p.offset);
        w.u64(p.size);
    }
    w.u64(ckpt.params.size());
    for (double v : ckpt.params) w.f64(v);
    w.u32(static_cast<uint32_t>(ckpt.config.size()));
    for (const auto& [k, v] : ckpt.config) {
        w.str(k);
        w.str(v);
    }
    w.u64(ckpt.seed);
    w.i64(ckpt.epochs);
    w.f64(ckpt.best_val_mrr);
    w.u64(param_hash(ckpt.params));
    write_file_bytes(path, w.bytes);
    write_file_text(path.string() + ".manifest.txt", checkpoint_manifest(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    ByteReader r(bytes);
    if (r.u32() != kCkptMagic) throw LoadError("bad checkpoint magic: " + path.string());
    if (r.u32() != kCkptVersion) throw LoadError("unsupported checkpoint version: " + path.string());
    Checkpoint c;
    c.family = r.str();
    uint32_t nl = r.u32();
    for (uint32_t i = 0; i < nl; ++i) {
        ParamInfo p;
        p.name = r.str();
        uint32_t nd = r.u32();
        for (uint32_t d = 0; d < nd; ++d) p.shape.push_back(r.u64());
        p.offset = r.u64();
        p.size = r.u64();
        c.layout.push_back(std::move(p));
    }
    uint64_t np = r.u64();
    c.params.resize(np);
    for (uint64_t i = 0; i < np; ++i) c.params[i] = r.f64();
    uint32_t nc = r.u32();
    for (uint32_t i = 0; i < nc; ++i) {
        std::string k = r.str();
        c.config[k] = r.str();
    }
    c.seed = r.u64();
    c.epochs = r.i64();
    c.best_val_mrr = r.f64();
    c.hash = r.u64();
    if (c.hash != param_hash(c.params)) throw LoadError("checkpoint parameter hash mismatch: " + path.string());
    return c;
}

std::string checkpoint_manifest(const Checkpoint& ckpt) {
    std::ostringstream out;
    out << "family\t" << ckpt.family << '\n';
    out << "seed\t" << ckpt.seed << '\n';
    out << "epochs\t" << ckpt.epochs << '\n';
    out << "best_val_mrr\t" << format_double(ckpt.best_val_mrr) << '\n';
    out << "param_count\t" << ckpt.params.size() << '\n';
    out << "param_hash\t" << hex64(param_hash(ckpt.params)) << '\n';
    for (const auto& [k, v] : ckpt.config) out << "config." << k << '\t' << v << '\n';
    for (const auto& p : ckpt.layout) {
        out << "array\t" << p.name << '\t';
        for (size_t i = 0; i < p.shape.size(); ++i) {
            if (i) out << 'x';
            out << p.shape[i];
        }
        out << "\toffset=" << p.offset << "\tsize=" << p.size << '\n';
    }
    return out.str();
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt, std::shared_ptr<const Model> base_cost,
                                             std::shared_ptr<const Model> base_sem) {
    auto fam = parse_family(ckpt.family);
    if (!fam) throw LoadError("unknown family in checkpoint: " + ckpt.family);
    ModelSizes sizes;
    auto dims_it = ckpt.config.find("dims");
    if (dims_it != ckpt.config.end()) {
        auto dims = dims_from_string(dims_it->second);
        switch (*fam) {
            case Family::cost_only: sizes.cost_dims = dims; break;
            case Family::semantic_only: sizes.sem_dims = dims; break;
            case Family::discriminative: sizes.disc_dims = dims; break;
            default: sizes.s1_dims = dims; break;
        }
    }
    auto model = make_model(*fam, sizes, 0, std::move(base_cost), std::move(base_sem));
    model->set_flat_params(ckpt.params);
    if (*fam == Family::s1_linear || *fam == Family::s1_nonlinear) {
        auto* s1 = dynamic_cast<S1Model*>(model.get());
        auto ch = ckpt.config.find("base_cost_hash");
        auto sh = ckpt.config.find("base_sem_hash");
        if (ch != ckpt.config.end() && sh != ckpt.config.end()) {
            // verify the supplied bases are the ones this S1 was trained on
            if (hex64(s1->cost_hash()) != ch->second || hex64(s1->sem_hash()) != sh->second)
                throw LoadError("S1 checkpoint base hashes do not match the supplied base models");
        }
    }
    return model;
}

}  // namespace morphorank
