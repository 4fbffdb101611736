#pragma once
// Minimal dense feed-forward nets with exact reverse-mode gradients.
// ReLU hidden layers, affine scalar output. Parameters live in one flat
// vector so optimizers and finite-difference checks stay trivial.

#include <string>
#include <vector>

#include "morphorank/common.hpp"

namespace morphorank {

double softplus(double x);
double sigmoid(double x);

struct DenseNet {
    std::vector<size_t> dims;        // e.g. {8, 16, 1}
    std::vector<double> params;      // per layer: W (out x in, row-major) then b

    static DenseNet create(std::vector<size_t> dims, Rng& rng);  // uniform fan-in init
    static size_t param_count(const std::vector<size_t>& dims);

    size_t layer_count() const { return dims.size() - 1; }
    size_t weight_offset(size_t layer) const;

    struct Trace {
        // acts[0] = input, acts[l+1] = post-activation output of layer l
        std::vector<std::vector<double>> acts;
    };

    // Scalar-output forward pass; requires dims.back() == 1.
    double forward1(const double* x, Trace* trace = nullptr) const;

    // Accumulates parameter gradients for a scalar output adjoint `dout`
    // into `gparams` (same length as params). If dx != nullptr, also
    // accumulates the input gradient.
    void backward1(const Trace& trace, double dout, double* gparams, double* dx = nullptr) const;
};

// ---------------------------------------------------------------------------
// Layer normalization over a small fixed-size vector, with learned affine.

struct LayerNorm {
    size_t dim;
    static constexpr double kEps = 1e-6;

    struct Trace {
        std::vector<double> x, xhat;
        double mu = 0, inv_std = 0;
    };

    // gain and bias are views into a flat parameter block of size 2*dim
    // (gain first, then bias).
    void forward(const double* x, const double* gain_bias, double* out, Trace* trace = nullptr) const;
    void backward(const Trace& trace, const double* gain_bias, const double* dout, double* g_gain_bias,
                  double* dx) const;
};

}  // namespace morphorank
