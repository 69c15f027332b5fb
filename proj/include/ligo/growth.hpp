#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ligo/model.hpp"

namespace ligo {

enum class Operator { stack, interpolate, net2net, copy, ligo };

inline const char* operator_name(Operator op) {
    switch (op) {
        case Operator::stack: return "stack";
        case Operator::interpolate: return "interpolate";
        case Operator::net2net: return "net2net";
        case Operator::copy: return "copy";
        case Operator::ligo: return "ligo";
    }
    return "?";
}

inline Operator operator_from_name(const std::string& s) {
    for (Operator op : {Operator::stack, Operator::interpolate, Operator::net2net, Operator::copy,
                        Operator::ligo})
        if (s == operator_name(op)) return op;
    throw spec_error("unknown growth operator '" + s + "'");
}

/// (source, target, operator, seed, options) for one growth step.
struct GrowthSpec {
    ModelConfig source;
    ModelConfig target;
    Operator op = Operator::stack;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> opts;

    void validate() const {
        source.validate();
        target.validate();
        if (target.num_layers < source.num_layers || target.hidden < source.hidden)
            throw spec_error("growth spec: target must not shrink (layers " +
                             std::to_string(source.num_layers) + "->" +
                             std::to_string(target.num_layers) + ", hidden " +
                             std::to_string(source.hidden) + "->" +
                             std::to_string(target.hidden) + ")");
        if (target.vocab != source.vocab || target.seq_len != source.seq_len ||
            target.ffn_mult != source.ffn_mult || target.dtype != source.dtype)
            throw spec_error("growth spec: vocab, seq_len, ffn_mult and dtype must match");
        switch (op) {
            case Operator::stack:
            case Operator::interpolate:
                if (target.hidden != source.hidden)
                    throw spec_error(std::string(operator_name(op)) +
                                     " grows depth only; hidden must match");
                if (target.num_layers % source.num_layers != 0)
                    throw spec_error(std::string(operator_name(op)) + ": target layers " +
                                     std::to_string(target.num_layers) +
                                     " is not an integer multiple of source layers " +
                                     std::to_string(source.num_layers));
                break;
            case Operator::net2net:
            case Operator::copy:
                if (target.num_layers != source.num_layers)
                    throw spec_error(std::string(operator_name(op)) +
                                     " grows width only; layer counts must match");
                break;
            case Operator::ligo: break;
        }
    }

    int depth_ratio() const { return target.num_layers / source.num_layers; }
};

/// Selection for widening one interface: new unit c copies source unit
/// picks[c]. Equivalent to a binary matrix with exactly one 1 per new column.
struct Selection {
    int source_dim = 0;
    std::vector<int> picks;

    int target_dim() const { return source_dim + static_cast<int>(picks.size()); }

    /// Copy counts per source unit, excluding the original.
    std::vector<int> counts() const {
        std::vector<int> n(source_dim, 0);
        for (int p : picks) ++n[p];
        return n;
    }
};

inline Selection draw_selection(int source_dim, int target_dim, RngState& rng) {
    if (target_dim < source_dim)
        throw spec_error("selection: target dim " + std::to_string(target_dim) +
                         " smaller than source dim " + std::to_string(source_dim));
    Selection sel;
    sel.source_dim = source_dim;
    sel.picks.resize(target_dim - source_dim);
    for (int& p : sel.picks) p = static_cast<int>(rng.below(static_cast<std::uint32_t>(source_dim)));
    return sel;
}

/// [I; S^T]: plain duplication rows, no normalization.
template <class T>
Mat<T> duplication_matrix(const Selection& sel) {
    Mat<T> m(sel.target_dim(), sel.source_dim);
    for (int i = 0; i < sel.source_dim; ++i) m(i, i) = T(1);
    for (std::size_t c = 0; c < sel.picks.size(); ++c)
        m(sel.source_dim + static_cast<int>(c), sel.picks[c]) = T(1);
    return m;
}

/// [I; S^T] D^{-1} with D = diag(S 1) + I: every replica of a selected row
/// (the original included) is scaled by 1 / copy-count.
template <class T>
Mat<T> duplication_matrix_normalized(const Selection& sel) {
    Mat<T> m = duplication_matrix<T>(sel);
    const std::vector<int> n = sel.counts();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (m(i, j) != T(0)) m(i, j) = T(1) / T(1 + n[j]);
    return m;
}

// ---------------------------------------------------------------------------
// Depth-only operators: cyclic stacking and k-fold interpolation.
// ---------------------------------------------------------------------------

namespace detail {
template <class T>
ParamSet<T> copy_layers_by_map(const ParamSet<T>& params, const GrowthSpec& spec,
                               const std::vector<int>& source_of) {
    ParamSet<T> out = zeros_like_config<T>(spec.target);
    for (const ParamKey& key : param_keys(spec.target)) {
        if (!key.per_layer()) {
            out.at(key) = params.at(key);
            continue;
        }
        ParamKey src = key;
        src.layer = source_of[key.layer];
        out.at(key) = params.at(src);
    }
    return out;
}
} // namespace detail

/// Layer l of the result copies source layer l mod L1; emb/pos/out verbatim.
template <class T>
ParamSet<T> grow_stack(const ParamSet<T>& params, const GrowthSpec& spec) {
    spec.validate();
    std::vector<int> source_of(spec.target.num_layers);
    for (int l = 0; l < spec.target.num_layers; ++l) source_of[l] = l % spec.source.num_layers;
    return detail::copy_layers_by_map(params, spec, source_of);
}

/// Each source layer appears k consecutive times.
template <class T>
ParamSet<T> grow_interpolate(const ParamSet<T>& params, const GrowthSpec& spec) {
    spec.validate();
    const int k = spec.depth_ratio();
    std::vector<int> source_of(spec.target.num_layers);
    for (int l = 0; l < spec.target.num_layers; ++l) source_of[l] = l / k;
    return detail::copy_layers_by_map(params, spec, source_of);
}

// ---------------------------------------------------------------------------
// Width-only operators.
// ---------------------------------------------------------------------------

/// The seeded width-expansion factors shared between grow_net2net_width and
/// the equivalent LiGO construction. One selection widens the residual
/// stream (used by every hidden-sized interface) and one per layer widens
/// the FFN inner dimension. Normalization placement follows the tying
/// scheme: the residual factor duplicates without normalization (LayerNorm
/// parameters are plain-copied), while each module's out-dimension factor
/// carries the 1/copy-count row normalization.
template <class T>
struct Net2NetFactors {
    Selection sel_res;
    std::vector<Selection> sel_fc1;
    Mat<T> res_dup;        // hidden duplication, unnormalized
    Mat<T> res_norm;       // hidden duplication with row normalization
    std::vector<Mat<T>> fc1_norm;
};

template <class T>
Net2NetFactors<T> make_net2net_factors(const ModelConfig& source, const ModelConfig& target,
                                       RngState rng) {
    Net2NetFactors<T> f;
    f.sel_res = draw_selection(source.hidden, target.hidden, rng);
    f.res_dup = duplication_matrix<T>(f.sel_res);
    f.res_norm = duplication_matrix_normalized<T>(f.sel_res);
    for (int l = 0; l < source.num_layers; ++l) {
        f.sel_fc1.push_back(draw_selection(source.ffn_dim(), target.ffn_dim(), rng));
        f.fc1_norm.push_back(duplication_matrix_normalized<T>(f.sel_fc1.back()));
    }
    return f;
}

/// Net2Net width expansion chained through emb -> layers -> out. The
/// embedding supplies the first selection and the output head consumes the
/// final one, so adjacent layers stay consistent.
template <class T>
ParamSet<T> grow_net2net_width(const ParamSet<T>& params, const GrowthSpec& spec) {
    spec.validate();
    const Net2NetFactors<T> f =
        make_net2net_factors<T>(spec.source, spec.target, RngState(spec.seed).fork("net2net"));
    ParamSet<T> out = zeros_like_config<T>(spec.target);

    out.at(Module::emb, Kind::weight) = matmul(f.res_dup, params.at(Module::emb, Kind::weight));
    out.at(Module::pos, Kind::weight) = matmul(f.res_dup, params.at(Module::pos, Kind::weight));
    out.at(Module::out, Kind::weight) =
        matmul_nt(params.at(Module::out, Kind::weight), f.res_dup);

    for (int l = 0; l < spec.source.num_layers; ++l) {
        for (Module m : {Module::q, Module::k, Module::v}) {
            out.at(m, Kind::weight, l) =
                kron_apply(f.res_dup, f.res_norm, params.at(m, Kind::weight, l));
            out.at(m, Kind::bias, l) = matmul(f.res_norm, params.at(m, Kind::bias, l));
        }
        out.at(Module::o, Kind::weight, l) =
            kron_apply(f.res_norm, f.res_dup, params.at(Module::o, Kind::weight, l));
        out.at(Module::o, Kind::bias, l) = matmul(f.res_dup, params.at(Module::o, Kind::bias, l));
        for (Module m : {Module::ln1, Module::ln2}) {
            out.at(m, Kind::gain, l) = matmul(f.res_dup, params.at(m, Kind::gain, l));
            out.at(m, Kind::bias, l) = matmul(f.res_dup, params.at(m, Kind::bias, l));
        }
        out.at(Module::fc1, Kind::weight, l) =
            kron_apply(f.res_dup, f.fc1_norm[l], params.at(Module::fc1, Kind::weight, l));
        out.at(Module::fc1, Kind::bias, l) =
            matmul(f.fc1_norm[l], params.at(Module::fc1, Kind::bias, l));
        out.at(Module::fc2, Kind::weight, l) =
            kron_apply(f.fc1_norm[l], f.res_dup, params.at(Module::fc2, Kind::weight, l));
        out.at(Module::fc2, Kind::bias, l) =
            matmul(f.res_dup, params.at(Module::fc2, Kind::bias, l));
    }
    return out;
}

/// Direct copy: source in the leading block, new weight entries from scaled
/// normal noise, new bias/gain entries zero.
template <class T>
ParamSet<T> grow_copy(const ParamSet<T>& params, const GrowthSpec& spec) {
    spec.validate();
    ParamSet<T> out = zeros_like_config<T>(spec.target);
    RngState rng = RngState(spec.seed).fork("copy");
    for (const ParamKey& key : param_keys(spec.target)) {
        const Mat<T>& src = params.at(key);
        Mat<T>& dst = out.at(key);
        for (int i = 0; i < dst.rows(); ++i)
            for (int j = 0; j < dst.cols(); ++j) {
                if (i < src.rows() && j < src.cols())
                    dst(i, j) = src(i, j);
                else if (key.kind == Kind::weight)
                    dst(i, j) = static_cast<T>(rng.normal() * kInitStd);
            }
    }
    return out;
}

/// Width+depth baseline dispatch for the non-learned operators.
template <class T>
ParamSet<T> grow(const ParamSet<T>& params, const GrowthSpec& spec) {
    switch (spec.op) {
        case Operator::stack: return grow_stack(params, spec);
        case Operator::interpolate: return grow_interpolate(params, spec);
        case Operator::net2net: return grow_net2net_width(params, spec);
        case Operator::copy: return grow_copy(params, spec);
        case Operator::ligo:
            throw spec_error("ligo growth requires the learned-operator path");
    }
    throw spec_error("unknown operator");
}

// ---------------------------------------------------------------------------
// Plain MLP stack: the setting in which Net2Net is exactly function
// preserving. Layer i maps dimension dims[i] -> dims[i+1] with no bias or
// activation.
// ---------------------------------------------------------------------------

template <class T>
struct MlpStack {
    std::vector<Mat<T>> layers;

    Mat<T> apply(const Mat<T>& x) const { // x: dim x n_inputs (columns are samples)
        Mat<T> h = x;
        for (const Mat<T>& w : layers) h = matmul(w, h);
        return h;
    }
};

/// Widens every hidden interface of an MLP stack with Net2Net: rows of the
/// producing layer are duplicated with 1/count normalization, columns of the
/// consuming layer are duplicated unnormalized. Input and output dimensions
/// are left unchanged, so the grown stack computes the same map.
template <class T>
MlpStack<T> grow_net2net_mlp(const MlpStack<T>& mlp, const std::vector<Selection>& selections) {
    if (selections.size() + 1 != mlp.layers.size())
        throw spec_error("net2net mlp: need one selection per hidden interface");
    MlpStack<T> out;
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
        Mat<T> w = mlp.layers[i];
        if (i > 0) w = matmul_nt(w, duplication_matrix<T>(selections[i - 1]));
        if (i + 1 < mlp.layers.size())
            w = matmul(duplication_matrix_normalized<T>(selections[i]), w);
        out.layers.push_back(std::move(w));
    }
    return out;
}

} // namespace ligo
