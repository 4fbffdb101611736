#include "morphorank/nn.hpp"

#include <cmath>

namespace morphorank {

double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

size_t DenseNet::param_count(const std::vector<size_t>& dims) {
    size_t n = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
    return n;
}

size_t DenseNet::weight_offset(size_t layer) const {
    size_t off = 0;
    for (size_t l = 0; l < layer; ++l) off += dims[l] * dims[l + 1] + dims[l + 1];
    return off;
}

DenseNet DenseNet::create(std::vector<size_t> dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("DenseNet needs at least 2 dims");
    DenseNet net;
    net.dims = std::move(dims);
    net.params.resize(param_count(net.dims), 0.0);
    size_t off = 0;
    for (size_t l = 0; l + 1 < net.dims.size(); ++l) {
        size_t in = net.dims[l], out = net.dims[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (size_t i = 0; i < in * out; ++i) net.params[off + i] = (2.0 * rng.uniform() - 1.0) * bound;
        off += in * out;
        for (size_t i = 0; i < out; ++i) net.params[off + i] = 0.0;  // biases start at zero
        off += out;
    }
    return net;
}

double DenseNet::forward1(const double* x, Trace* trace) const {
    if (dims.back() != 1) throw std::logic_error("forward1 requires scalar output");
    std::vector<double> cur(x, x + dims[0]);
    if (trace) {
        trace->acts.clear();
        trace->acts.push_back(cur);
    }
    size_t off = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        size_t in = dims[l], out = dims[l + 1];
        std::vector<double> next(out);
        const double* W = params.data() + off;
        const double* b = params.data() + off + in * out;
        for (size_t o = 0; o < out; ++o) {
            double s = b[o];
            const double* w = W + o * in;
            for (size_t i = 0; i < in; ++i) s += w[i] * cur[i];
            next[o] = s;
        }
        bool hidden = l + 2 < dims.size();
        if (hidden)
            for (double& v : next) v = v > 0 ? v : 0.0;
        cur = std::move(next);
        if (trace) trace->acts.push_back(cur);
        off += in * out + out;
    }
    return cur[0];
}

void DenseNet::backward1(const Trace& trace, double dout, double* gparams, double* dx) const {
    size_t n_layers = layer_count();
    std::vector<double> delta{dout};
    for (size_t li = n_layers; li-- > 0;) {
        size_t in = dims[li], out = dims[li + 1];
        size_t off = weight_offset(li);
        const double* W = params.data() + off;
        const std::vector<double>& a_in = trace.acts[li];
        const std::vector<double>& a_out = trace.acts[li + 1];
        bool hidden = li + 1 < n_layers;
        // through the activation of this layer's output
        std::vector<double> d(out);
        for (size_t o = 0; o < out; ++o) d[o] = hidden && a_out[o] <= 0.0 ? 0.0 : delta[o];
        // parameter grads
        double* gW = gparams + off;
        double* gb = gparams + off + in * out;
        for (size_t o = 0; o < out; ++o) {
            gb[o] += d[o];
            double* gw = gW + o * in;
            for (size_t i = 0; i < in; ++i) gw[i] += d[o] * a_in[i];
        }
        // input grads
        std::vector<double> din(in, 0.0);
        for (size_t o = 0; o < out; ++o) {
            const double* w = W + o * in;
            for (size_t i = 0; i < in; ++i) din[i] += d[o] * w[i];
        }
        delta = std::move(din);
    }
    if (dx)
        for (size_t i = 0; i < dims[0]; ++i) dx[i] += delta[i];
}

void LayerNorm::forward(const double* x, const double* gain_bias, double* out, Trace* trace) const {
    double mu = 0;
    for (size_t i = 0; i < dim; ++i) mu += x[i];
    mu /= static_cast<double>(dim);
    double var = 0;
    for (size_t i = 0; i < dim; ++i) var += (x[i] - mu) * (x[i] - mu);
    var /= static_cast<double>(dim);
    double inv_std = 1.0 / std::sqrt(var + kEps);
    if (trace) {
        trace->x.assign(x, x + dim);
        trace->xhat.resize(dim);
        trace->mu = mu;
        trace->inv_std = inv_std;
    }
    for (size_t i = 0; i < dim; ++i) {
        double xhat = (x[i] - mu) * inv_std;
        if (trace) trace->xhat[i] = xhat;
        out[i] = gain_bias[i] * xhat + gain_bias[dim + i];
    }
}

void LayerNorm::backward(const Trace& trace, const double* gain_bias, const double* dout,
                         double* g_gain_bias, double* dx) const {
    double n = static_cast<double>(dim);
    std::vector<double> dxhat(dim);
    double sum_dxhat = 0, sum_dxhat_xhat = 0;
    for (size_t i = 0; i < dim; ++i) {
        g_gain_bias[i] += dout[i] * trace.xhat[i];
        g_gain_bias[dim + i] += dout[i];
        dxhat[i] = dout[i] * gain_bias[i];
        sum_dxhat += dxhat[i];
        sum_dxhat_xhat += dxhat[i] * trace.xhat[i];
    }
    for (size_t i = 0; i < dim; ++i) {
        dx[i] += trace.inv_std * (dxhat[i] - sum_dxhat / n - trace.xhat[i] * sum_dxhat_xhat / n);
    }
}

}  // namespace morphorank
