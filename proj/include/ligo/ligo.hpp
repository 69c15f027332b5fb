#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ligo/growth.hpp"
#include "ligo/model.hpp"

namespace ligo {

/// The learnable growth operator. Stored factors are the width expansion
/// matrices (one shared residual-stream factor plus per-source-layer
/// attention/FFN factors) and one depth blending matrix per module. The
/// in-dimension factors are never stored: tying makes them aliases of the
/// stored ones (residual-stream interfaces share b_emb, the attention
/// projection consumes b_v, fc2 consumes b_fc1).
template <class T>
struct LigoParams {
    ModelConfig source;
    ModelConfig target;

    Mat<T> b_emb;                // hidden2 x hidden1
    std::vector<Mat<T>> b_q;     // per source layer, hidden2 x hidden1
    std::vector<Mat<T>> b_k;
    std::vector<Mat<T>> b_v;
    std::vector<Mat<T>> b_fc1;   // per source layer, ffn2 x ffn1

    // depth blenders, target layers x source layers
    Mat<T> w_q, w_k, w_v, w_o, w_ln1, w_ln2, w_fc1, w_fc2;

    bool operator==(const LigoParams&) const = default;

    void validate() const {
        source.validate();
        target.validate();
        if (target.num_layers < source.num_layers || target.hidden < source.hidden)
            throw spec_error("ligo params: target must not shrink");
        auto expect = [](const Mat<T>& m, int r, int c, const std::string& what) {
            if (m.rows() != r || m.cols() != c)
                throw shape_error("ligo params: " + what + " has shape " + m.shape_str() +
                                  ", expected " + std::to_string(r) + "x" + std::to_string(c));
        };
        const int l1 = source.num_layers, l2 = target.num_layers;
        expect(b_emb, target.hidden, source.hidden, "b_emb");
        if (static_cast<int>(b_q.size()) != l1 || static_cast<int>(b_k.size()) != l1 ||
            static_cast<int>(b_v.size()) != l1 || static_cast<int>(b_fc1.size()) != l1)
            throw shape_error("ligo params: per-layer factor count != source layers");
        for (int l = 0; l < l1; ++l) {
            expect(b_q[l], target.hidden, source.hidden, "b_q");
            expect(b_k[l], target.hidden, source.hidden, "b_k");
            expect(b_v[l], target.hidden, source.hidden, "b_v");
            expect(b_fc1[l], target.ffn_dim(), source.ffn_dim(), "b_fc1");
        }
        for (const Mat<T>* w : {&w_q, &w_k, &w_v, &w_o, &w_ln1, &w_ln2, &w_fc1, &w_fc2})
            expect(*w, l2, l1, "depth blender");
    }
};

template <class T>
LigoParams<T> zeros_ligo(const ModelConfig& source, const ModelConfig& target) {
    LigoParams<T> p;
    p.source = source;
    p.target = target;
    const int l1 = source.num_layers, l2 = target.num_layers;
    p.b_emb = Mat<T>(target.hidden, source.hidden);
    for (int l = 0; l < l1; ++l) {
        p.b_q.emplace_back(target.hidden, source.hidden);
        p.b_k.emplace_back(target.hidden, source.hidden);
        p.b_v.emplace_back(target.hidden, source.hidden);
        p.b_fc1.emplace_back(target.ffn_dim(), source.ffn_dim());
    }
    for (Mat<T>* w : {&p.w_q, &p.w_k, &p.w_v, &p.w_o, &p.w_ln1, &p.w_ln2, &p.w_fc1, &p.w_fc2})
        *w = Mat<T>(l2, l1);
    return p;
}

/// Stored tensors in canonical (serialization / optimization) order.
template <class T>
std::vector<std::pair<std::string, Mat<T>*>> ligo_tensors(LigoParams<T>& p) {
    std::vector<std::pair<std::string, Mat<T>*>> out;
    out.emplace_back("ligo/b_emb", &p.b_emb);
    for (std::size_t l = 0; l < p.b_q.size(); ++l) {
        const std::string base = "ligo/layers." + std::to_string(l) + ".";
        out.emplace_back(base + "b_q", &p.b_q[l]);
        out.emplace_back(base + "b_k", &p.b_k[l]);
        out.emplace_back(base + "b_v", &p.b_v[l]);
        out.emplace_back(base + "b_fc1", &p.b_fc1[l]);
    }
    out.emplace_back("ligo/w_q", &p.w_q);
    out.emplace_back("ligo/w_k", &p.w_k);
    out.emplace_back("ligo/w_v", &p.w_v);
    out.emplace_back("ligo/w_o", &p.w_o);
    out.emplace_back("ligo/w_ln1", &p.w_ln1);
    out.emplace_back("ligo/w_ln2", &p.w_ln2);
    out.emplace_back("ligo/w_fc1", &p.w_fc1);
    out.emplace_back("ligo/w_fc2", &p.w_fc2);
    return out;
}

/// Closed-form learnable-parameter count: one shared embedding factor, per
/// source layer three attention factors and one (ffn_mult^2-times larger)
/// FFN factor, and eight depth blenders.
inline std::uint64_t ligo_param_count(const ModelConfig& source, const ModelConfig& target) {
    const std::uint64_t dd = std::uint64_t(target.hidden) * source.hidden;
    const std::uint64_t ff = std::uint64_t(target.ffn_dim()) * source.ffn_dim();
    const std::uint64_t l1 = source.num_layers, l2 = target.num_layers;
    return dd + l1 * (3 * dd + ff) + 8 * l2 * l1;
}

/// Depth pattern of cyclic stacking: row l picks source layer l mod L1.
template <class T>
Mat<T> stack_pattern(int l1, int l2) {
    Mat<T> w(l2, l1);
    for (int l = 0; l < l2; ++l) w(l, l % l1) = T(1);
    return w;
}

/// Depth pattern of k-fold interpolation: row l picks source layer l / k.
template <class T>
Mat<T> interpolate_pattern(int l1, int l2) {
    if (l2 % l1 != 0) throw spec_error("interpolate pattern: depth ratio must be an integer");
    Mat<T> w(l2, l1);
    const int k = l2 / l1;
    for (int l = 0; l < l2; ++l) w(l, l / k) = T(1);
    return w;
}

namespace detail {

// The eight depth-blended channels. Each carries a weight-like tensor
// (Kind::weight or Kind::gain) and its bias.
struct Channel {
    Module module;
    Kind primary;
};

inline constexpr std::array<Channel, 8> kChannels = {{
    {Module::q, Kind::weight},
    {Module::k, Kind::weight},
    {Module::v, Kind::weight},
    {Module::o, Kind::weight},
    {Module::ln1, Kind::gain},
    {Module::ln2, Kind::gain},
    {Module::fc1, Kind::weight},
    {Module::fc2, Kind::weight},
}};

template <class T>
const Mat<T>& blender_of(const LigoParams<T>& p, Module m) {
    switch (m) {
        case Module::q: return p.w_q;
        case Module::k: return p.w_k;
        case Module::v: return p.w_v;
        case Module::o: return p.w_o;
        case Module::ln1: return p.w_ln1;
        case Module::ln2: return p.w_ln2;
        case Module::fc1: return p.w_fc1;
        case Module::fc2: return p.w_fc2;
        default: throw spec_error("module has no depth blender");
    }
}

template <class T>
Mat<T>& blender_of(LigoParams<T>& p, Module m) {
    return const_cast<Mat<T>&>(blender_of(static_cast<const LigoParams<T>&>(p), m));
}

// Width-stage output of one channel for one source layer: the expanded
// weight/gain plus the expanded bias, both grown by the module's
// out-dimension factor per the tying scheme.
template <class T>
std::pair<Mat<T>, Mat<T>> width_expand_channel(const LigoParams<T>& p, const ParamSet<T>& small,
                                               Module m, Kind primary, int j) {
    const Mat<T>& w = small.at(m, primary, j);
    const Mat<T>& b = small.at(m, Kind::bias, j);
    switch (m) {
        case Module::q: return {kron_apply(p.b_emb, p.b_q[j], w), matmul(p.b_q[j], b)};
        case Module::k: return {kron_apply(p.b_emb, p.b_k[j], w), matmul(p.b_k[j], b)};
        case Module::v: return {kron_apply(p.b_emb, p.b_v[j], w), matmul(p.b_v[j], b)};
        case Module::o: return {kron_apply(p.b_v[j], p.b_emb, w), matmul(p.b_emb, b)};
        case Module::ln1:
        case Module::ln2: return {matmul(p.b_emb, w), matmul(p.b_emb, b)};
        case Module::fc1: return {kron_apply(p.b_emb, p.b_fc1[j], w), matmul(p.b_fc1[j], b)};
        case Module::fc2: return {kron_apply(p.b_fc1[j], p.b_emb, w), matmul(p.b_emb, b)};
        default: throw spec_error("module is not width-expandable per layer");
    }
}

} // namespace detail

/// Grows a parameter set with the operator: width pass per source layer,
/// then per-module depth blending, then the global tensors (embeddings and
/// positions by b_emb, output head by b_emb on its input side). Linear in
/// `small` for fixed params.
template <class T>
ParamSet<T> ligo_expand(const ParamSet<T>& small, const LigoParams<T>& p) {
    p.validate();
    if (!small.config.same_arch(p.source))
        throw shape_error("ligo_expand: parameter set does not match the operator's source");
    ParamSet<T> out = zeros_like_config<T>(p.target);

    out.at(Module::emb, Kind::weight) = matmul(p.b_emb, small.at(Module::emb, Kind::weight));
    out.at(Module::pos, Kind::weight) = matmul(p.b_emb, small.at(Module::pos, Kind::weight));
    out.at(Module::out, Kind::weight) = matmul_nt(small.at(Module::out, Kind::weight), p.b_emb);

    const int l1 = p.source.num_layers, l2 = p.target.num_layers;
    for (const detail::Channel& ch : detail::kChannels) {
        std::vector<std::pair<Mat<T>, Mat<T>>> width;
        width.reserve(l1);
        for (int j = 0; j < l1; ++j)
            width.push_back(detail::width_expand_channel(p, small, ch.module, ch.primary, j));
        const Mat<T>& w = detail::blender_of(p, ch.module);
        for (int l = 0; l < l2; ++l) {
            Mat<T>& primary = out.at(ch.module, ch.primary, l);
            Mat<T>& bias = out.at(ch.module, Kind::bias, l);
            for (int j = 0; j < l1; ++j) {
                add_scaled(primary, width[j].first, w(l, j));
                add_scaled(bias, width[j].second, w(l, j));
            }
        }
    }
    return out;
}

/// Adjoint of ligo_expand in its parameters: maps a gradient w.r.t. the
/// expanded ParamSet to a gradient w.r.t. the operator (small is fixed).
template <class T>
LigoParams<T> ligo_expand_adjoint(const ParamSet<T>& small, const LigoParams<T>& p,
                                  const ParamSet<T>& d_target) {
    p.validate();
    LigoParams<T> g = zeros_ligo<T>(p.source, p.target);
    const int l1 = p.source.num_layers, l2 = p.target.num_layers;

    // global tensors: emb' = B W, pos' = B W, out' = W B^T
    add_scaled(g.b_emb,
               matmul_nt(d_target.at(Module::emb, Kind::weight),
                         small.at(Module::emb, Kind::weight)),
               T(1));
    add_scaled(g.b_emb,
               matmul_nt(d_target.at(Module::pos, Kind::weight),
                         small.at(Module::pos, Kind::weight)),
               T(1));
    add_scaled(g.b_emb,
               matmul_tn(d_target.at(Module::out, Kind::weight),
                         small.at(Module::out, Kind::weight)),
               T(1));

    for (const detail::Channel& ch : detail::kChannels) {
        std::vector<std::pair<Mat<T>, Mat<T>>> width;
        width.reserve(l1);
        for (int j = 0; j < l1; ++j)
            width.push_back(detail::width_expand_channel(p, small, ch.module, ch.primary, j));

        const Mat<T>& w = detail::blender_of(p, ch.module);
        Mat<T>& dw = detail::blender_of(g, ch.module);

        for (int j = 0; j < l1; ++j) {
            // backprop through the depth blend
            const auto [rows, cols] = shape_of(p.target, ParamKey{ch.module, ch.primary, 0});
            const auto [brows, bcols] = shape_of(p.target, ParamKey{ch.module, Kind::bias, 0});
            Mat<T> d_primary(rows, cols);
            Mat<T> d_bias(brows, bcols);
            for (int l = 0; l < l2; ++l) {
                const Mat<T>& dt_primary = d_target.at(ch.module, ch.primary, l);
                const Mat<T>& dt_bias = d_target.at(ch.module, Kind::bias, l);
                add_scaled(d_primary, dt_primary, w(l, j));
                add_scaled(d_bias, dt_bias, w(l, j));
                T dot = 0;
                for (std::size_t i = 0; i < dt_primary.size(); ++i)
                    dot += dt_primary.values()[i] * width[j].first.values()[i];
                for (std::size_t i = 0; i < dt_bias.size(); ++i)
                    dot += dt_bias.values()[i] * width[j].second.values()[i];
                dw(l, j) += dot;
            }

            // backprop through the width expansion Omega = B W A^T:
            // dB += dOmega A W^T, dA += dOmega^T B W; biases b' = B b give
            // dB += db' b^T.
            const Mat<T>& wt = small.at(ch.module, ch.primary, j);
            const Mat<T>& bt = small.at(ch.module, Kind::bias, j);
            switch (ch.module) {
                case Module::q:
                case Module::k:
                case Module::v: {
                    Mat<T>& db = ch.module == Module::q ? g.b_q[j]
                                 : ch.module == Module::k ? g.b_k[j]
                                                          : g.b_v[j];
                    const Mat<T>& bfac = ch.module == Module::q ? p.b_q[j]
                                         : ch.module == Module::k ? p.b_k[j]
                                                                  : p.b_v[j];
                    add_scaled(db, matmul_nt(matmul(d_primary, p.b_emb), wt), T(1));
                    add_scaled(g.b_emb, matmul(matmul_tn(d_primary, bfac), wt), T(1));
                    add_scaled(db, matmul_nt(d_bias, bt), T(1));
                    break;
                }
                case Module::o: {
                    add_scaled(g.b_emb, matmul_nt(matmul(d_primary, p.b_v[j]), wt), T(1));
                    add_scaled(g.b_v[j], matmul(matmul_tn(d_primary, p.b_emb), wt), T(1));
                    add_scaled(g.b_emb, matmul_nt(d_bias, bt), T(1));
                    break;
                }
                case Module::ln1:
                case Module::ln2: {
                    add_scaled(g.b_emb, matmul_nt(d_primary, wt), T(1));
                    add_scaled(g.b_emb, matmul_nt(d_bias, bt), T(1));
                    break;
                }
                case Module::fc1: {
                    add_scaled(g.b_fc1[j], matmul_nt(matmul(d_primary, p.b_emb), wt), T(1));
                    add_scaled(g.b_emb, matmul(matmul_tn(d_primary, p.b_fc1[j]), wt), T(1));
                    add_scaled(g.b_fc1[j], matmul_nt(d_bias, bt), T(1));
                    break;
                }
                case Module::fc2: {
                    add_scaled(g.b_emb, matmul_nt(matmul(d_primary, p.b_fc1[j]), wt), T(1));
                    add_scaled(g.b_fc1[j], matmul(matmul_tn(d_primary, p.b_emb), wt), T(1));
                    add_scaled(g.b_emb, matmul_nt(d_bias, bt), T(1));
                    break;
                }
                default: break;
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Constructors reproducing the non-learned operators exactly.
// ---------------------------------------------------------------------------

/// Identity width factors, cyclic-stacking depth blenders.
template <class T>
LigoParams<T> ligo_from_stack(const ModelConfig& source, const ModelConfig& target) {
    GrowthSpec{source, target, Operator::stack}.validate();
    LigoParams<T> p = zeros_ligo<T>(source, target);
    p.b_emb = Mat<T>::identity(source.hidden);
    for (int l = 0; l < source.num_layers; ++l) {
        p.b_q[l] = p.b_k[l] = p.b_v[l] = Mat<T>::identity(source.hidden);
        p.b_fc1[l] = Mat<T>::identity(source.ffn_dim());
    }
    const Mat<T> w = stack_pattern<T>(source.num_layers, target.num_layers);
    p.w_q = p.w_k = p.w_v = p.w_o = p.w_ln1 = p.w_ln2 = p.w_fc1 = p.w_fc2 = w;
    return p;
}

/// Identity width factors, repeated-row depth blenders.
template <class T>
LigoParams<T> ligo_from_interpolation(const ModelConfig& source, const ModelConfig& target) {
    GrowthSpec{source, target, Operator::interpolate}.validate();
    LigoParams<T> p = ligo_from_stack<T>(source, target);
    const Mat<T> w = interpolate_pattern<T>(source.num_layers, target.num_layers);
    p.w_q = p.w_k = p.w_v = p.w_o = p.w_ln1 = p.w_ln2 = p.w_fc1 = p.w_fc2 = w;
    return p;
}

/// Net2Net selection factors, identity depth blenders. Uses the same seeded
/// draw as grow_net2net_width, so both paths produce the same expansion.
template <class T>
LigoParams<T> ligo_from_net2net(const ModelConfig& source, const ModelConfig& target,
                                const RngState& rng) {
    GrowthSpec{source, target, Operator::net2net}.validate();
    const Net2NetFactors<T> f = make_net2net_factors<T>(source, target, rng.fork("net2net"));
    LigoParams<T> p = zeros_ligo<T>(source, target);
    p.b_emb = f.res_dup;
    for (int l = 0; l < source.num_layers; ++l) {
        p.b_q[l] = p.b_k[l] = p.b_v[l] = f.res_norm;
        p.b_fc1[l] = f.fc1_norm[l];
    }
    const Mat<T> w = Mat<T>::identity(source.num_layers);
    p.w_q = p.w_k = p.w_v = p.w_o = p.w_ln1 = p.w_ln2 = p.w_fc1 = p.w_fc2 = w;
    return p;
}

// ---------------------------------------------------------------------------
// Initialization ahead of operator learning.
// ---------------------------------------------------------------------------

enum class LigoInitStrategy { stack_net2net, random_small };

inline LigoInitStrategy ligo_init_strategy_from_name(const std::string& s) {
    if (s == "stack_net2net") return LigoInitStrategy::stack_net2net;
    if (s == "random_small") return LigoInitStrategy::random_small;
    throw spec_error("unknown ligo init strategy '" + s + "'");
}

inline constexpr double kLigoInitNoise = 1e-3;

/// Pre-learning operator state. The default encodes a known-good map:
/// Net2Net width factors plus stacking depth blenders, perturbed by
/// zero-mean noise so learning can break symmetry. With zero noise the
/// expansion equals grow_stack(grow_net2net_width(.)) exactly.
template <class T>
LigoParams<T> ligo_init(LigoInitStrategy strategy, const ModelConfig& source,
                        const ModelConfig& target, const RngState& rng,
                        double noise = kLigoInitNoise) {
    source.validate();
    target.validate();
    if (target.num_layers < source.num_layers || target.hidden < source.hidden)
        throw spec_error("ligo_init: target must not shrink");

    LigoParams<T> p = zeros_ligo<T>(source, target);
    if (strategy == LigoInitStrategy::stack_net2net) {
        const Net2NetFactors<T> f = make_net2net_factors<T>(source, target, rng.fork("net2net"));
        p.b_emb = f.res_dup;
        for (int l = 0; l < source.num_layers; ++l) {
            p.b_q[l] = p.b_k[l] = p.b_v[l] = f.res_norm;
            p.b_fc1[l] = f.fc1_norm[l];
        }
        const Mat<T> w = stack_pattern<T>(source.num_layers, target.num_layers);
        p.w_q = p.w_k = p.w_v = p.w_o = p.w_ln1 = p.w_ln2 = p.w_fc1 = p.w_fc2 = w;
        if (noise > 0) {
            RngState noise_rng = rng.fork("ligo_init_noise");
            for (auto& [name, mat] : ligo_tensors(p))
                for (T& v : mat->values()) v += static_cast<T>(noise_rng.normal() * noise);
        }
    } else {
        RngState init_rng = rng.fork("ligo_init_random");
        for (auto& [name, mat] : ligo_tensors(p)) fill_normal(*mat, init_rng, kInitStd);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Operator learning: a few optimizer steps on the expansion parameters with
// the source model frozen.
// ---------------------------------------------------------------------------

struct LigoLearnConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Minimizes loss(forward(expand(small, p))) over the operator parameters
/// with adaptive-moment updates. steps = 0 returns the init unchanged.
/// next_batch must yield a fresh training batch per call.
template <class T>
LigoParams<T> ligo_learn(const ParamSet<T>& small, LigoParams<T> p,
                         const std::function<Batch()>& next_batch, int steps,
                         const LigoLearnConfig& opt = {}) {
    if (steps < 0) throw spec_error("ligo_learn: steps must be >= 0");
    if (steps == 0) return p;
    if (!next_batch) throw data_error("ligo_learn: no data stream supplied");

    auto tensors = ligo_tensors(p);
    std::vector<Mat<T>> m1, m2;
    for (auto& [name, mat] : tensors) {
        m1.emplace_back(mat->rows(), mat->cols());
        m2.emplace_back(mat->rows(), mat->cols());
    }

    for (int step = 1; step <= steps; ++step) {
        const Batch batch = next_batch();
        ParamSet<T> expanded = ligo_expand(small, p);
        auto [loss_value, d_model] = grad(expanded, batch);
        if (!std::isfinite(loss_value))
            throw divergence_error("ligo_learn: non-finite loss at step " + std::to_string(step));
        LigoParams<T> g = ligo_expand_adjoint(small, p, d_model);

        auto g_tensors = ligo_tensors(g);
        const double bc1 = 1.0 - std::pow(opt.beta1, step);
        const double bc2 = 1.0 - std::pow(opt.beta2, step);
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            Mat<T>& theta = *tensors[i].second;
            const Mat<T>& gi = *g_tensors[i].second;
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double gv = double(gi.values()[k]);
                m1[i].values()[k] =
                    static_cast<T>(opt.beta1 * double(m1[i].values()[k]) + (1.0 - opt.beta1) * gv);
                m2[i].values()[k] = static_cast<T>(opt.beta2 * double(m2[i].values()[k]) +
                                                   (1.0 - opt.beta2) * gv * gv);
                const double mhat = double(m1[i].values()[k]) / bc1;
                const double vhat = double(m2[i].values()[k]) / bc2;
                theta.values()[k] -=
                    static_cast<T>(opt.lr * mhat / (std::sqrt(vhat) + opt.eps));
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Uniform-width MLP abstraction: the setting in which the whole operator can
// be materialized as one dense matrix and checked against the factorized
// path.
// ---------------------------------------------------------------------------

template <class T>
struct UniformLigoOperator {
    int d1 = 0, d2 = 0, l1 = 0, l2 = 0;
    std::vector<Mat<T>> in_factors;  // A_l, d2 x d1
    std::vector<Mat<T>> out_factors; // B_l, d2 x d1
    Mat<T> depth;                    // l2 x l1

    static UniformLigoOperator random(int l1, int l2, int d1, int d2, RngState& rng) {
        UniformLigoOperator op;
        op.d1 = d1;
        op.d2 = d2;
        op.l1 = l1;
        op.l2 = l2;
        for (int l = 0; l < l1; ++l) {
            Mat<T> a(d2, d1), b(d2, d1);
            fill_normal(a, rng, 1.0);
            fill_normal(b, rng, 1.0);
            op.in_factors.push_back(std::move(a));
            op.out_factors.push_back(std::move(b));
        }
        op.depth = Mat<T>(l2, l1);
        fill_normal(op.depth, rng, 1.0);
        return op;
    }

    /// Factorized expansion of a stack of L1 square layers.
    std::vector<Mat<T>> expand(const std::vector<Mat<T>>& theta) const {
        if (static_cast<int>(theta.size()) != l1)
            throw shape_error("uniform expand: layer count mismatch");
        std::vector<Mat<T>> width;
        for (int j = 0; j < l1; ++j)
            width.push_back(kron_apply(in_factors[j], out_factors[j], theta[j]));
        std::vector<Mat<T>> out;
        for (int l = 0; l < l2; ++l) {
            Mat<T> acc(d2, d2);
            for (int j = 0; j < l1; ++j) add_scaled(acc, width[j], depth(l, j));
            out.push_back(std::move(acc));
        }
        return out;
    }

    /// Stacked column-major vectorization of all layers.
    static Mat<T> vec_layers(const std::vector<Mat<T>>& theta) {
        int total = 0;
        for (const Mat<T>& w : theta) total += w.rows() * w.cols();
        Mat<T> v(total, 1);
        int at = 0;
        for (const Mat<T>& w : theta) {
            Mat<T> vw = vec(w);
            for (int i = 0; i < vw.rows(); ++i) v(at + i, 0) = vw(i, 0);
            at += vw.rows();
        }
        return v;
    }

    /// Depth factor: depth (x) I, an l2 x l1 grid of d2^2 diagonal blocks.
    Mat<T> depth_factor(std::int64_t cap = kKronDefaultCap) const {
        return kron(depth, Mat<T>::identity(d2 * d2), cap);
    }

    /// Width factor: block-diagonal with blocks A_l (x) B_l of shape
    /// d2^2 x d1^2.
    Mat<T> width_factor(std::int64_t cap = kKronDefaultCap) const {
        const std::int64_t rows = std::int64_t(l1) * d2 * d2;
        const std::int64_t cols = std::int64_t(l1) * d1 * d1;
        if (rows * cols > cap)
            throw size_error("width factor: " + std::to_string(rows * cols) +
                             " entries exceed cap " + std::to_string(cap));
        Mat<T> r(static_cast<int>(rows), static_cast<int>(cols));
        for (int j = 0; j < l1; ++j) {
            const Mat<T> block = kron(in_factors[j], out_factors[j], cap);
            for (int i = 0; i < block.rows(); ++i)
                for (int c = 0; c < block.cols(); ++c)
                    r(j * d2 * d2 + i, j * d1 * d1 + c) = block(i, c);
        }
        return r;
    }

    /// The dense operator (depth (x) I) * blockdiag(A_l (x) B_l), shape
    /// L2 D2^2 x L1 D1^2. Verification-scale only.
    Mat<T> assemble_dense_m(std::int64_t cap = kKronDefaultCap) const {
        const std::int64_t rows = std::int64_t(l2) * d2 * d2;
        const std::int64_t cols = std::int64_t(l1) * d1 * d1;
        if (rows * cols > cap)
            throw size_error("assemble_dense_m: " + std::to_string(rows * cols) +
                             " entries exceed cap " + std::to_string(cap));
        return matmul(depth_factor(cap), width_factor(cap));
    }
};

} // namespace ligo
