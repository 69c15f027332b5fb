#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ligo/matrix.hpp"
#include "ligo/rng.hpp"

namespace ligo {

enum class Dtype { f32, f64 };

inline std::string dtype_name(Dtype d) { return d == Dtype::f32 ? "f32" : "f64"; }

inline Dtype dtype_from_name(const std::string& s) {
    if (s == "f32") return Dtype::f32;
    if (s == "f64") return Dtype::f64;
    throw spec_error("unknown dtype '" + s + "' (expected f32 or f64)");
}

/// Architecture descriptor for the decoder-style char LM.
struct ModelConfig {
    int num_layers = 1;
    int hidden = 8;
    int heads = 1;
    int ffn_mult = 4;
    int vocab = 2;
    int seq_len = 8;
    Dtype dtype = Dtype::f32;

    void validate() const {
        if (num_layers < 1 || hidden < 1 || heads < 1 || ffn_mult < 1 || vocab < 1 || seq_len < 1)
            throw spec_error("model config: all counts must be >= 1");
        if (hidden % heads != 0)
            throw spec_error("model config: hidden (" + std::to_string(hidden) +
                             ") not divisible by heads (" + std::to_string(heads) + ")");
    }

    int ffn_dim() const { return ffn_mult * hidden; }

    bool operator==(const ModelConfig&) const = default;

    bool same_arch(const ModelConfig& o) const {
        return num_layers == o.num_layers && hidden == o.hidden && heads == o.heads &&
               ffn_mult == o.ffn_mult && vocab == o.vocab && seq_len == o.seq_len;
    }
};

enum class Module { emb, pos, q, k, v, o, ln1, ln2, fc1, fc2, out };
enum class Kind { weight, bias, gain };

inline const char* module_name(Module m) {
    switch (m) {
        case Module::emb: return "emb";
        case Module::pos: return "pos";
        case Module::q: return "q";
        case Module::k: return "k";
        case Module::v: return "v";
        case Module::o: return "o";
        case Module::ln1: return "ln1";
        case Module::ln2: return "ln2";
        case Module::fc1: return "fc1";
        case Module::fc2: return "fc2";
        case Module::out: return "out";
    }
    return "?";
}

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::weight: return "weight";
        case Kind::bias: return "bias";
        case Kind::gain: return "gain";
    }
    return "?";
}

/// Key of one named tensor. layer is -1 for the global tensors (emb/pos/out).
struct ParamKey {
    Module module = Module::emb;
    Kind kind = Kind::weight;
    int layer = -1;

    auto operator<=>(const ParamKey&) const = default;

    bool per_layer() const { return layer >= 0; }

    std::string name() const {
        std::string n;
        if (per_layer()) n = "layers." + std::to_string(layer) + ".";
        n += module_name(module);
        n += ".";
        n += kind_name(kind);
        return n;
    }
};

/// Canonical tensor inventory for a config, in serialization order.
inline std::vector<ParamKey> param_keys(const ModelConfig& cfg) {
    std::vector<ParamKey> keys;
    keys.push_back({Module::emb, Kind::weight, -1});
    keys.push_back({Module::pos, Kind::weight, -1});
    for (int l = 0; l < cfg.num_layers; ++l) {
        for (Module m : {Module::q, Module::k, Module::v, Module::o}) {
            keys.push_back({m, Kind::weight, l});
            keys.push_back({m, Kind::bias, l});
        }
        for (Module m : {Module::ln1, Module::ln2}) {
            keys.push_back({m, Kind::gain, l});
            keys.push_back({m, Kind::bias, l});
        }
        keys.push_back({Module::fc1, Kind::weight, l});
        keys.push_back({Module::fc1, Kind::bias, l});
        keys.push_back({Module::fc2, Kind::weight, l});
        keys.push_back({Module::fc2, Kind::bias, l});
    }
    keys.push_back({Module::out, Kind::weight, -1});
    return keys;
}

/// rows x cols of a tensor under the f(x) = Wx + b orientation: weights map
/// column vectors, emb is hidden x vocab (one column per token), pos is
/// hidden x seq_len, vectors are n x 1.
inline std::pair<int, int> shape_of(const ModelConfig& cfg, const ParamKey& key) {
    const int d = cfg.hidden;
    const int f = cfg.ffn_dim();
    switch (key.module) {
        case Module::emb: return {d, cfg.vocab};
        case Module::pos: return {d, cfg.seq_len};
        case Module::q:
        case Module::k:
        case Module::v:
        case Module::o: return key.kind == Kind::weight ? std::pair{d, d} : std::pair{d, 1};
        case Module::ln1:
        case Module::ln2: return {d, 1};
        case Module::fc1: return key.kind == Kind::weight ? std::pair{f, d} : std::pair{f, 1};
        case Module::fc2: return key.kind == Kind::weight ? std::pair{d, f} : std::pair{d, 1};
        case Module::out: return {cfg.vocab, d};
    }
    return {0, 0};
}

/// Named, role-tagged tensor collection holding all weights of one model.
template <class T>
struct ParamSet {
    ModelConfig config;
    std::map<ParamKey, Mat<T>> tensors;

    Mat<T>& at(const ParamKey& key) {
        auto it = tensors.find(key);
        if (it == tensors.end()) throw shape_error("param set: missing tensor " + key.name());
        return it->second;
    }
    const Mat<T>& at(const ParamKey& key) const {
        auto it = tensors.find(key);
        if (it == tensors.end()) throw shape_error("param set: missing tensor " + key.name());
        return it->second;
    }
    Mat<T>& at(Module m, Kind k, int layer = -1) { return at(ParamKey{m, k, layer}); }
    const Mat<T>& at(Module m, Kind k, int layer = -1) const { return at(ParamKey{m, k, layer}); }

    bool operator==(const ParamSet& o) const = default;
};

/// Zero-filled ParamSet with the exact schema demanded by the config.
template <class T>
ParamSet<T> zeros_like_config(const ModelConfig& cfg) {
    cfg.validate();
    ParamSet<T> p;
    p.config = cfg;
    for (const ParamKey& key : param_keys(cfg)) {
        auto [r, c] = shape_of(cfg, key);
        p.tensors.emplace(key, Mat<T>(r, c));
    }
    return p;
}

inline constexpr double kInitStd = 0.02;

/// Weights from scaled normal draws, LayerNorm gains 1, biases 0.
template <class T>
ParamSet<T> init_random(const ModelConfig& cfg, RngState rng) {
    ParamSet<T> p = zeros_like_config<T>(cfg);
    for (const ParamKey& key : param_keys(cfg)) {
        Mat<T>& t = p.at(key);
        if (key.kind == Kind::weight)
            fill_normal(t, rng, kInitStd);
        else if (key.kind == Kind::gain)
            for (T& v : t.values()) v = T(1);
    }
    return p;
}

/// One training batch: tokens and next-token targets, batch*seq each,
/// row-major by sequence.
struct Batch {
    int batch = 0;
    int seq = 0;
    std::vector<std::int32_t> tokens;
    std::vector<std::int32_t> targets;
};

inline constexpr double kLayerNormEps = 1e-5;

/// Row-wise LayerNorm. Writes the pre-affine normalized rows into x_hat
/// and the reciprocal stddevs into rstd (both sized by the caller's x).
template <class T>
Mat<T> layer_norm_rows(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, Mat<T>& x_hat,
                       std::vector<T>& rstd) {
    const int n = x.rows(), d = x.cols();
    Mat<T> y(n, d);
    x_hat = Mat<T>(n, d);
    rstd.assign(n, T(0));
    for (int i = 0; i < n; ++i) {
        T mean = 0;
        for (int j = 0; j < d; ++j) mean += x(i, j);
        mean /= T(d);
        T var = 0;
        for (int j = 0; j < d; ++j) {
            const T c = x(i, j) - mean;
            var += c * c;
        }
        var /= T(d);
        const T r = T(1) / std::sqrt(var + T(kLayerNormEps));
        rstd[i] = r;
        for (int j = 0; j < d; ++j) {
            const T h = (x(i, j) - mean) * r;
            x_hat(i, j) = h;
            y(i, j) = gain(j, 0) * h + bias(j, 0);
        }
    }
    return y;
}

template <class T>
T gelu_scalar(T x) {
    return T(0.5) * x * (T(1) + std::erf(x * T(0.7071067811865475)));
}

template <class T>
T gelu_grad_scalar(T x) {
    const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.7071067811865475)));
    const T pdf = std::exp(T(-0.5) * x * x) * T(0.3989422804014327);
    return cdf + x * pdf;
}

namespace detail {

// Per-layer activation cache for the backward pass.
template <class T>
struct LayerCache {
    Mat<T> x_in;            // block input, (B*S) x D
    Mat<T> ln1_hat, ln2_hat;
    std::vector<T> ln1_rstd, ln2_rstd;
    Mat<T> q, k, v;         // projected activations
    std::vector<Mat<T>> attn; // softmax probs, one S x S per (b, head)
    Mat<T> ctx;             // merged attention output
    Mat<T> x_mid;           // after attention residual
    Mat<T> ffn_pre;         // fc1 output before GELU
    Mat<T> ffn_act;         // after GELU
};

template <class T>
struct ForwardCache {
    Mat<T> x0;
    std::vector<LayerCache<T>> layers;
    Mat<T> x_final;
    Mat<T> logits;
};

// y = x W^T + b (rows are activations, W maps column vectors).
template <class T>
Mat<T> linear_rows(const Mat<T>& x, const Mat<T>& w, const Mat<T>& b) {
    Mat<T> y = matmul_nt(x, w);
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j) y(i, j) += b(j, 0);
    return y;
}

template <class T>
void forward_impl(const ParamSet<T>& params, const std::vector<std::int32_t>& tokens, int batch,
                  int seq, ForwardCache<T>& cache) {
    const ModelConfig& cfg = params.config;
    cfg.validate();
    if (static_cast<int>(tokens.size()) != batch * seq)
        throw shape_error("forward: token grid size " + std::to_string(tokens.size()) +
                          " != batch*seq " + std::to_string(batch * seq));
    if (seq > cfg.seq_len)
        throw data_error("forward: sequence length " + std::to_string(seq) +
                         " exceeds config seq_len " + std::to_string(cfg.seq_len));
    for (std::int32_t t : tokens)
        if (t < 0 || t >= cfg.vocab)
            throw data_error("forward: token id " + std::to_string(t) + " out of range [0, " +
                             std::to_string(cfg.vocab) + ")");

    const int d = cfg.hidden;
    const int n = batch * seq;
    const int heads = cfg.heads;
    const int dh = d / heads;
    const T inv_sqrt_dh = T(1) / std::sqrt(T(dh));

    const Mat<T>& emb = params.at(Module::emb, Kind::weight);
    const Mat<T>& pos = params.at(Module::pos, Kind::weight);

    Mat<T> x(n, d);
    for (int b = 0; b < batch; ++b)
        for (int t = 0; t < seq; ++t) {
            const int row = b * seq + t;
            const std::int32_t tok = tokens[row];
            for (int j = 0; j < d; ++j) x(row, j) = emb(j, tok) + pos(j, t);
        }
    cache.x0 = x;
    cache.layers.assign(cfg.num_layers, LayerCache<T>{});

    for (int l = 0; l < cfg.num_layers; ++l) {
        LayerCache<T>& lc = cache.layers[l];
        lc.x_in = x;

        Mat<T> a1 = layer_norm_rows(x, params.at(Module::ln1, Kind::gain, l),
                                    params.at(Module::ln1, Kind::bias, l), lc.ln1_hat,
                                    lc.ln1_rstd);

        lc.q = linear_rows(a1, params.at(Module::q, Kind::weight, l),
                           params.at(Module::q, Kind::bias, l));
        lc.k = linear_rows(a1, params.at(Module::k, Kind::weight, l),
                           params.at(Module::k, Kind::bias, l));
        lc.v = linear_rows(a1, params.at(Module::v, Kind::weight, l),
                           params.at(Module::v, Kind::bias, l));

        lc.ctx = Mat<T>(n, d);
        lc.attn.assign(static_cast<std::size_t>(batch) * heads, Mat<T>{});
        for (int b = 0; b < batch; ++b)
            for (int h = 0; h < heads; ++h) {
                Mat<T>& probs = lc.attn[static_cast<std::size_t>(b) * heads + h];
                probs = Mat<T>(seq, seq);
                const int row0 = b * seq;
                const int col0 = h * dh;
                // causal softmax over scores q.k / sqrt(dh), positions <= t only
                for (int t = 0; t < seq; ++t) {
                    T maxs = -std::numeric_limits<T>::infinity();
                    for (int u = 0; u <= t; ++u) {
                        T s = 0;
                        for (int e = 0; e < dh; ++e)
                            s += lc.q(row0 + t, col0 + e) * lc.k(row0 + u, col0 + e);
                        s *= inv_sqrt_dh;
                        probs(t, u) = s;
                        maxs = std::max(maxs, s);
                    }
                    T z = 0;
                    for (int u = 0; u <= t; ++u) {
                        const T e = std::exp(probs(t, u) - maxs);
                        probs(t, u) = e;
                        z += e;
                    }
                    for (int u = 0; u <= t; ++u) probs(t, u) /= z;
                    for (int e = 0; e < dh; ++e) {
                        T acc = 0;
                        for (int u = 0; u <= t; ++u) acc += probs(t, u) * lc.v(row0 + u, col0 + e);
                        lc.ctx(row0 + t, col0 + e) = acc;
                    }
                }
            }

        Mat<T> attn_out = linear_rows(lc.ctx, params.at(Module::o, Kind::weight, l),
                                      params.at(Module::o, Kind::bias, l));
        Mat<T> x_mid = x;
        x_mid.map() += attn_out.map();
        lc.x_mid = x_mid;

        Mat<T> a2 = layer_norm_rows(x_mid, params.at(Module::ln2, Kind::gain, l),
                                    params.at(Module::ln2, Kind::bias, l), lc.ln2_hat,
                                    lc.ln2_rstd);
        lc.ffn_pre = linear_rows(a2, params.at(Module::fc1, Kind::weight, l),
                                 params.at(Module::fc1, Kind::bias, l));
        lc.ffn_act = lc.ffn_pre;
        for (T& vv : lc.ffn_act.values()) vv = gelu_scalar(vv);
        Mat<T> ffn_out = linear_rows(lc.ffn_act, params.at(Module::fc2, Kind::weight, l),
                                     params.at(Module::fc2, Kind::bias, l));
        x = x_mid;
        x.map() += ffn_out.map();
    }

    cache.x_final = x;
    cache.logits = matmul_nt(x, params.at(Module::out, Kind::weight));
}

} // namespace detail

/// Causal forward pass. Logits come back as a (batch*seq) x vocab matrix,
/// one row per position in batch-major order.
template <class T>
Mat<T> forward(const ParamSet<T>& params, const std::vector<std::int32_t>& tokens, int batch,
               int seq) {
    detail::ForwardCache<T> cache;
    detail::forward_impl(params, tokens, batch, seq, cache);
    return cache.logits;
}

/// Mean next-token cross-entropy over all positions.
template <class T>
double loss_from_logits(const Mat<T>& logits, const std::vector<std::int32_t>& targets) {
    if (static_cast<int>(targets.size()) != logits.rows())
        throw shape_error("loss: " + std::to_string(targets.size()) + " targets vs " +
                          std::to_string(logits.rows()) + " logit rows");
    const int v = logits.cols();
    double total = 0.0;
    for (int i = 0; i < logits.rows(); ++i) {
        const std::int32_t y = targets[i];
        if (y < 0 || y >= v)
            throw data_error("loss: target id " + std::to_string(y) + " out of range");
        T maxv = logits(i, 0);
        for (int j = 1; j < v; ++j) maxv = std::max(maxv, logits(i, j));
        double z = 0.0;
        for (int j = 0; j < v; ++j) z += std::exp(double(logits(i, j)) - double(maxv));
        total += std::log(z) + double(maxv) - double(logits(i, y));
    }
    return total / double(logits.rows());
}

template <class T>
double loss(const ParamSet<T>& params, const Batch& batch) {
    return loss_from_logits(forward(params, batch.tokens, batch.batch, batch.seq), batch.targets);
}

/// Analytic reverse-mode gradients of loss_scale * loss w.r.t. every tensor.
/// Returns (loss, gradient set keyed exactly like params).
template <class T>
std::pair<double, ParamSet<T>> grad(const ParamSet<T>& params, const Batch& batch,
                                    T loss_scale = T(1)) {
    const ModelConfig& cfg = params.config;
    detail::ForwardCache<T> cache;
    detail::forward_impl(params, batch.tokens, batch.batch, batch.seq, cache);
    const double loss_value = loss_from_logits(cache.logits, batch.targets);

    ParamSet<T> g = zeros_like_config<T>(cfg);
    const int batch_n = batch.batch, seq = batch.seq;
    const int n = batch_n * seq;
    const int d = cfg.hidden;
    const int heads = cfg.heads;
    const int dh = d / heads;
    const T inv_sqrt_dh = T(1) / std::sqrt(T(dh));

    // d loss / d logits: (softmax - onehot) * loss_scale / n
    Mat<T> dlogits(n, cfg.vocab);
    for (int i = 0; i < n; ++i) {
        T maxv = cache.logits(i, 0);
        for (int j = 1; j < cfg.vocab; ++j) maxv = std::max(maxv, cache.logits(i, j));
        T z = 0;
        for (int j = 0; j < cfg.vocab; ++j) {
            const T e = std::exp(cache.logits(i, j) - maxv);
            dlogits(i, j) = e;
            z += e;
        }
        const T inv = loss_scale / (z * T(n));
        for (int j = 0; j < cfg.vocab; ++j) dlogits(i, j) *= inv;
        dlogits(i, batch.targets[i]) -= loss_scale / T(n);
    }

    g.at(Module::out, Kind::weight) = matmul_tn(dlogits, cache.x_final);
    Mat<T> dx = matmul(dlogits, params.at(Module::out, Kind::weight));

    auto backprop_linear = [&](const Mat<T>& dy, const Mat<T>& x_in, const Mat<T>& w, Mat<T>& gw,
                               Mat<T>& gb) {
        gw = matmul_tn(dy, x_in);
        gb = Mat<T>(dy.cols(), 1);
        for (int i = 0; i < dy.rows(); ++i)
            for (int j = 0; j < dy.cols(); ++j) gb(j, 0) += dy(i, j);
        return matmul(dy, w);
    };

    auto backprop_layernorm = [&](const Mat<T>& dy, const Mat<T>& x_hat,
                                  const std::vector<T>& rstd, const Mat<T>& gain, Mat<T>& ggain,
                                  Mat<T>& gbias) {
        const int rows = dy.rows(), cols = dy.cols();
        Mat<T> dx_out(rows, cols);
        ggain = Mat<T>(cols, 1);
        gbias = Mat<T>(cols, 1);
        for (int i = 0; i < rows; ++i) {
            T mean_dh = 0, mean_dh_hat = 0;
            for (int j = 0; j < cols; ++j) {
                const T dh_j = dy(i, j) * gain(j, 0);
                ggain(j, 0) += dy(i, j) * x_hat(i, j);
                gbias(j, 0) += dy(i, j);
                mean_dh += dh_j;
                mean_dh_hat += dh_j * x_hat(i, j);
            }
            mean_dh /= T(cols);
            mean_dh_hat /= T(cols);
            for (int j = 0; j < cols; ++j) {
                const T dh_j = dy(i, j) * gain(j, 0);
                dx_out(i, j) = rstd[i] * (dh_j - mean_dh - x_hat(i, j) * mean_dh_hat);
            }
        }
        return dx_out;
    };

    for (int l = cfg.num_layers - 1; l >= 0; --l) {
        const detail::LayerCache<T>& lc = cache.layers[l];

        // FFN: x = x_mid + fc2(gelu(fc1(ln2(x_mid))))
        Mat<T> dffn_act = backprop_linear(dx, lc.ffn_act, params.at(Module::fc2, Kind::weight, l),
                                          g.at(Module::fc2, Kind::weight, l),
                                          g.at(Module::fc2, Kind::bias, l));
        Mat<T> dffn_pre = dffn_act;
        for (std::size_t i = 0; i < dffn_pre.size(); ++i)
            dffn_pre.values()[i] *= gelu_grad_scalar(lc.ffn_pre.values()[i]);

        // recompute ln2 output rows (cheap) for the fc1 input gradient
        Mat<T> a2(n, d);
        {
            const Mat<T>& gain = params.at(Module::ln2, Kind::gain, l);
            const Mat<T>& bias = params.at(Module::ln2, Kind::bias, l);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) a2(i, j) = gain(j, 0) * lc.ln2_hat(i, j) + bias(j, 0);
        }
        Mat<T> da2 = backprop_linear(dffn_pre, a2, params.at(Module::fc1, Kind::weight, l),
                                     g.at(Module::fc1, Kind::weight, l),
                                     g.at(Module::fc1, Kind::bias, l));
        Mat<T> dx_mid = backprop_layernorm(da2, lc.ln2_hat, lc.ln2_rstd,
                                           params.at(Module::ln2, Kind::gain, l),
                                           g.at(Module::ln2, Kind::gain, l),
                                           g.at(Module::ln2, Kind::bias, l));
        dx_mid.map() += dx.map(); // residual branch

        // attention: x_mid = x_in + o(ctx)
        Mat<T> dctx = backprop_linear(dx_mid, lc.ctx, params.at(Module::o, Kind::weight, l),
                                      g.at(Module::o, Kind::weight, l),
                                      g.at(Module::o, Kind::bias, l));

        Mat<T> dq(n, d), dk(n, d), dv(n, d);
        for (int b = 0; b < batch_n; ++b)
            for (int h = 0; h < heads; ++h) {
                const Mat<T>& probs = lc.attn[static_cast<std::size_t>(b) * heads + h];
                const int row0 = b * seq;
                const int col0 = h * dh;
                for (int t = 0; t < seq; ++t) {
                    // dP = dctx v^T restricted to the causal window
                    T dot = 0;
                    std::vector<T> dp(static_cast<std::size_t>(t) + 1);
                    for (int u = 0; u <= t; ++u) {
                        T acc = 0;
                        for (int e = 0; e < dh; ++e)
                            acc += dctx(row0 + t, col0 + e) * lc.v(row0 + u, col0 + e);
                        dp[u] = acc;
                        dot += acc * probs(t, u);
                    }
                    for (int u = 0; u <= t; ++u) {
                        const T ds = probs(t, u) * (dp[u] - dot) * inv_sqrt_dh;
                        for (int e = 0; e < dh; ++e) {
                            dq(row0 + t, col0 + e) += ds * lc.k(row0 + u, col0 + e);
                            dk(row0 + u, col0 + e) += ds * lc.q(row0 + t, col0 + e);
                        }
                        for (int e = 0; e < dh; ++e)
                            dv(row0 + u, col0 + e) += probs(t, u) * dctx(row0 + t, col0 + e);
                    }
                }
            }

        // shared ln1 output feeds q, k, v
        Mat<T> a1(n, d);
        {
            const Mat<T>& gain = params.at(Module::ln1, Kind::gain, l);
            const Mat<T>& bias = params.at(Module::ln1, Kind::bias, l);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) a1(i, j) = gain(j, 0) * lc.ln1_hat(i, j) + bias(j, 0);
        }
        Mat<T> da1 = backprop_linear(dq, a1, params.at(Module::q, Kind::weight, l),
                                     g.at(Module::q, Kind::weight, l),
                                     g.at(Module::q, Kind::bias, l));
        da1.map() += backprop_linear(dk, a1, params.at(Module::k, Kind::weight, l),
                                     g.at(Module::k, Kind::weight, l),
                                     g.at(Module::k, Kind::bias, l))
                         .map();
        da1.map() += backprop_linear(dv, a1, params.at(Module::v, Kind::weight, l),
                                     g.at(Module::v, Kind::weight, l),
                                     g.at(Module::v, Kind::bias, l))
                         .map();
        Mat<T> dx_in = backprop_layernorm(da1, lc.ln1_hat, lc.ln1_rstd,
                                          params.at(Module::ln1, Kind::gain, l),
                                          g.at(Module::ln1, Kind::gain, l),
                                          g.at(Module::ln1, Kind::bias, l));
        dx_in.map() += dx_mid.map(); // residual branch
        dx = dx_in;
    }

    Mat<T>& gemb = g.at(Module::emb, Kind::weight);
    Mat<T>& gpos = g.at(Module::pos, Kind::weight);
    for (int b = 0; b < batch_n; ++b)
        for (int t = 0; t < seq; ++t) {
            const int row = b * seq + t;
            const std::int32_t tok = batch.tokens[row];
            for (int j = 0; j < d; ++j) {
                gemb(j, tok) += dx(row, j);
                gpos(j, t) += dx(row, j);
            }
        }

    return {loss_value, std::move(g)};
}

/// Exact parameter count of the schema.
inline std::uint64_t param_count(const ModelConfig& cfg) {
    const std::uint64_t d = cfg.hidden, f = cfg.ffn_dim(), v = cfg.vocab, s = cfg.seq_len,
                        l = cfg.num_layers;
    // emb + pos + out, then per layer: 4 attention mats + biases, 2 LN gain/bias
    // pairs, fc1/fc2 + biases.
    return d * v + d * s + v * d + l * (4 * d * d + 4 * d + 4 * d + f * d + f + d * f + d);
}

/// FLOPs of one dense product of an m x k matrix applied to n columns.
inline std::uint64_t matmul_flops(std::uint64_t m, std::uint64_t k, std::uint64_t n) {
    return 2 * m * k * n;
}

/// Forward FLOPs of one batch: every weight matmul plus the attention
/// score/value products. Embedding gathers, LayerNorm and softmax are not
/// counted (no matmuls).
inline std::uint64_t forward_flops(const ModelConfig& cfg, int batch_size, int seq) {
    const std::uint64_t d = cfg.hidden, f = cfg.ffn_dim(), v = cfg.vocab;
    const std::uint64_t s = seq, b = batch_size;
    const std::uint64_t per_layer = 4 * matmul_flops(d, d, s)   // q,k,v,o projections
                                    + 2 * matmul_flops(s, d, s) // scores + prob.values
                                    + matmul_flops(f, d, s) + matmul_flops(d, f, s);
    return b * (cfg.num_layers * per_layer + matmul_flops(v, d, s));
}

/// One optimization step: forward plus backward, with backward counted as
/// twice the forward cost.
inline std::uint64_t flops_per_step(const ModelConfig& cfg, int batch_size, int seq) {
    return 3 * forward_flops(cfg, batch_size, seq);
}

} // namespace ligo
