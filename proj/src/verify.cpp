#include "ligo/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ligo/growth.hpp"

namespace ligo {

std::vector<double> flatten_params(const ParamSet<double>& p) {
    std::vector<double> x;
    for (const ParamKey& key : param_keys(p.config)) {
        const auto vals = p.at(key).values();
        x.insert(x.end(), vals.begin(), vals.end());
    }
    return x;
}

ParamSet<double> unflatten_params(const ModelConfig& cfg, std::span<const double> x) {
    ParamSet<double> p = zeros_like_config<double>(cfg);
    std::size_t at = 0;
    for (const ParamKey& key : param_keys(cfg)) {
        auto vals = p.at(key).values();
        if (at + vals.size() > x.size()) throw shape_error("unflatten_params: vector too short");
        std::copy(x.begin() + at, x.begin() + at + vals.size(), vals.begin());
        at += vals.size();
    }
    if (at != x.size()) throw shape_error("unflatten_params: vector too long");
    return p;
}

std::vector<double> flatten_ligo(const LigoParams<double>& p) {
    std::vector<double> x;
    auto& mut = const_cast<LigoParams<double>&>(p);
    for (auto& [name, mat] : ligo_tensors(mut)) {
        const auto vals = mat->values();
        x.insert(x.end(), vals.begin(), vals.end());
    }
    return x;
}

LigoParams<double> unflatten_ligo(const ModelConfig& source, const ModelConfig& target,
                                  std::span<const double> x) {
    LigoParams<double> p = zeros_ligo<double>(source, target);
    std::size_t at = 0;
    for (auto& [name, mat] : ligo_tensors(p)) {
        auto vals = mat->values();
        if (at + vals.size() > x.size()) throw shape_error("unflatten_ligo: vector too short");
        std::copy(x.begin() + at, x.begin() + at + vals.size(), vals.begin());
        at += vals.size();
    }
    if (at != x.size()) throw shape_error("unflatten_ligo: vector too long");
    return p;
}

double relative_grad_error(std::span<const double> analytic, std::span<const double> numeric) {
    if (analytic.size() != numeric.size())
        throw shape_error("relative_grad_error: size mismatch");
    double num = 0.0, den = 1e-12;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        num = std::max(num, std::abs(analytic[i] - numeric[i]));
        den = std::max(den, std::abs(numeric[i]));
    }
    return num / den;
}

namespace {

Batch random_batch(const ModelConfig& cfg, int batch, int seq, RngState& rng) {
    Batch b;
    b.batch = batch;
    b.seq = seq;
    b.tokens.resize(static_cast<std::size_t>(batch) * seq);
    b.targets.resize(b.tokens.size());
    for (auto& t : b.tokens) t = static_cast<std::int32_t>(rng.below(cfg.vocab));
    for (auto& t : b.targets) t = static_cast<std::int32_t>(rng.below(cfg.vocab));
    return b;
}

} // namespace

double model_grad_check(const ModelConfig& cfg, int batch, int seq, std::uint64_t seed,
                        double eps) {
    RngState rng(seed);
    const ParamSet<double> params = init_random<double>(cfg, rng.fork("params"));
    RngState data_rng = rng.fork("data");
    const Batch b = random_batch(cfg, batch, seq, data_rng);

    auto [loss_value, analytic_set] = grad(params, b);
    (void)loss_value;
    const std::vector<double> analytic = flatten_params(analytic_set);

    const std::vector<double> x = flatten_params(params);
    const std::vector<double> numeric = finite_diff_grad(
        [&](std::span<const double> v) { return loss(unflatten_params(cfg, v), b); }, x, eps);
    return relative_grad_error(analytic, numeric);
}

double ligo_grad_check(const ModelConfig& source, const ModelConfig& target, int batch, int seq,
                       std::uint64_t seed, double eps) {
    RngState rng(seed);
    const ParamSet<double> small = init_random<double>(source, rng.fork("params"));
    const LigoParams<double> p =
        ligo_init<double>(LigoInitStrategy::stack_net2net, source, target, rng.fork("ligo"));
    RngState data_rng = rng.fork("data");
    const Batch b = random_batch(target, batch, seq, data_rng);

    auto [loss_value, d_model] = grad(ligo_expand(small, p), b);
    (void)loss_value;
    const std::vector<double> analytic = flatten_ligo(ligo_expand_adjoint(small, p, d_model));

    const std::vector<double> x = flatten_ligo(p);
    const std::vector<double> numeric = finite_diff_grad(
        [&](std::span<const double> v) {
            return loss(ligo_expand(small, unflatten_ligo(source, target, v)), b);
        },
        x, eps);
    return relative_grad_error(analytic, numeric);
}

double max_param_diff(const ParamSet<double>& a, const ParamSet<double>& b) {
    double m = 0.0;
    for (const ParamKey& key : param_keys(a.config))
        m = std::max(m, max_abs_diff(a.at(key), b.at(key)));
    return m;
}

namespace {

void check(std::vector<CheckResult>& out, const std::string& suite, const std::string& name,
           bool passed, const std::string& detail) {
    out.push_back({suite, name, passed, detail});
}

std::string max_detail(double value, double tol) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |diff| %.3g (tolerance %.1g)", value, tol);
    return buf;
}

void run_algebra(std::vector<CheckResult>& out) {
    const std::string suite = "algebra";
    RngState rng(20240);

    {
        MatD w(3, 5);
        fill_normal(w, rng, 1.0);
        const bool ok = unvec(vec(w), 3, 5) == w;
        check(out, suite, "vec/unvec round-trip is exact", ok, ok ? "bitwise equal" : "mismatch");
    }
    {
        MatD a(4, 2), b(5, 3), w(3, 2);
        fill_normal(a, rng, 1.0);
        fill_normal(b, rng, 1.0);
        fill_normal(w, rng, 1.0);
        const MatD lhs = matmul(kron(a, b), vec(w));
        const MatD rhs = vec(kron_apply(a, b, w));
        const double d = max_abs_diff(lhs, rhs);
        check(out, suite, "(A(x)B) vec(W) = vec(B W A^T)", d < 1e-12, max_detail(d, 1e-12));
    }
    {
        MatD a(3, 4), b(5, 6), w(6, 4);
        fill_normal(a, rng, 1.0);
        fill_normal(b, rng, 1.0);
        fill_normal(w, rng, 1.0);
        const MatD direct = kron_apply(a, b, w);
        const MatD via_dense = unvec(matmul(kron(a, b), vec(w)), b.rows(), a.rows());
        const double d = max_abs_diff(direct, via_dense);
        check(out, suite, "kron_apply agrees with the materialized path", d < 1e-12,
              max_detail(d, 1e-12));
    }
    {
        RngState op_rng = rng.fork("uniform");
        const auto op = UniformLigoOperator<double>::random(2, 4, 3, 5, op_rng);
        std::vector<MatD> theta;
        for (int l = 0; l < 2; ++l) {
            MatD w(3, 3);
            fill_normal(w, op_rng, 1.0);
            theta.push_back(std::move(w));
        }
        const MatD dense = matmul(op.assemble_dense_m(), UniformLigoOperator<double>::vec_layers(theta));
        const MatD fact = UniformLigoOperator<double>::vec_layers(op.expand(theta));
        const double d = max_abs_diff(dense, fact);
        check(out, suite, "dense operator equals the factorized expansion", d < 1e-12,
              max_detail(d, 1e-12));

        // structure of the two factors
        const MatD depth = op.depth_factor();
        bool depth_ok = depth.rows() == 4 * 25 && depth.cols() == 2 * 25;
        for (int bl = 0; bl < 4 && depth_ok; ++bl)
            for (int bj = 0; bj < 2 && depth_ok; ++bj)
                for (int i = 0; i < 25 && depth_ok; ++i)
                    for (int j = 0; j < 25 && depth_ok; ++j) {
                        const double v = depth(bl * 25 + i, bj * 25 + j);
                        depth_ok = (i == j) ? (v == op.depth(bl, bj)) : (v == 0.0);
                    }
        check(out, suite, "depth factor is a grid of w_ij * I blocks", depth_ok,
              depth_ok ? "pattern verified" : "pattern violated");

        const MatD width = op.width_factor();
        bool width_ok = width.rows() == 2 * 25 && width.cols() == 2 * 9;
        for (int i = 0; i < width.rows() && width_ok; ++i)
            for (int j = 0; j < width.cols() && width_ok; ++j)
                if (i / 25 != j / 9) width_ok = (width(i, j) == 0.0);
        check(out, suite, "width factor is block-diagonal (one block per source layer)",
              width_ok, width_ok ? "pattern verified" : "pattern violated");
    }
    {
        // stacking as a dense operator: w = stacking pattern, A = B = I
        const int d = 3, l1 = 2, l2 = 4;
        UniformLigoOperator<double> op;
        op.d1 = op.d2 = d;
        op.l1 = l1;
        op.l2 = l2;
        for (int l = 0; l < l1; ++l) {
            op.in_factors.push_back(MatD::identity(d));
            op.out_factors.push_back(MatD::identity(d));
        }
        op.depth = stack_pattern<double>(l1, l2);
        std::vector<MatD> theta;
        RngState t_rng = rng.fork("stack_theta");
        for (int l = 0; l < l1; ++l) {
            MatD w(d, d);
            fill_normal(w, t_rng, 1.0);
            theta.push_back(std::move(w));
        }
        const MatD mapped = matmul(op.assemble_dense_m(), UniformLigoOperator<double>::vec_layers(theta));
        std::vector<MatD> stacked;
        for (int l = 0; l < l2; ++l) stacked.push_back(theta[l % l1]);
        const double diff =
            max_abs_diff(mapped, UniformLigoOperator<double>::vec_layers(stacked));
        check(out, suite, "stacking-pattern dense operator tiles the layers", diff == 0.0,
              max_detail(diff, 0.0));
    }
}

void run_special_cases(std::vector<CheckResult>& out) {
    const std::string suite = "special-cases";
    const ModelConfig source{2, 6, 2, 4, 13, 10, Dtype::f64};

    {
        ModelConfig target = source;
        target.num_layers = 6;
        double worst = 0.0;
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            const auto params = init_random<double>(source, RngState(seed));
            const auto direct = grow_stack(params, {source, target, Operator::stack, seed});
            const auto via_op = ligo_expand(params, ligo_from_stack<double>(source, target));
            worst = std::max(worst, max_param_diff(direct, via_op));
        }
        check(out, suite, "expand(from_stack) reproduces grow_stack", worst < 1e-12,
              max_detail(worst, 1e-12));
    }
    {
        ModelConfig target = source;
        target.num_layers = 4;
        double worst = 0.0;
        for (std::uint64_t seed : {21u, 22u, 23u}) {
            const auto params = init_random<double>(source, RngState(seed));
            const auto direct =
                grow_interpolate(params, {source, target, Operator::interpolate, seed});
            const auto via_op = ligo_expand(params, ligo_from_interpolation<double>(source, target));
            worst = std::max(worst, max_param_diff(direct, via_op));
        }
        check(out, suite, "expand(from_interpolation) reproduces grow_interpolate", worst < 1e-12,
              max_detail(worst, 1e-12));
    }
    {
        ModelConfig target = source;
        target.hidden = 10;
        target.heads = 2;
        double worst = 0.0;
        for (std::uint64_t seed : {31u, 32u, 33u}) {
            const auto params = init_random<double>(source, RngState(seed));
            const auto direct =
                grow_net2net_width(params, {source, target, Operator::net2net, seed});
            const auto via_op =
                ligo_expand(params, ligo_from_net2net<double>(source, target, RngState(seed)));
            worst = std::max(worst, max_param_diff(direct, via_op));
        }
        check(out, suite, "expand(from_net2net) reproduces grow_net2net_width", worst < 1e-12,
              max_detail(worst, 1e-12));
    }
    {
        double worst = 0.0;
        for (std::uint64_t seed : {41u, 42u, 43u}) {
            RngState rng(seed);
            MlpStack<double> mlp;
            mlp.layers.push_back(MatD(3, 4));
            mlp.layers.push_back(MatD(2, 3));
            for (auto& w : mlp.layers) fill_normal(w, rng, 1.0);
            std::vector<Selection> sels = {draw_selection(3, 5, rng)};
            const MlpStack<double> grown = grow_net2net_mlp(mlp, sels);
            MatD x(4, 20);
            fill_normal(x, rng, 1.0);
            worst = std::max(worst, max_abs_diff(mlp.apply(x), grown.apply(x)));
        }
        check(out, suite, "net2net widening preserves MLP outputs", worst < 1e-12,
              max_detail(worst, 1e-12));
    }
}

void run_gradients(std::vector<CheckResult>& out) {
    const std::string suite = "gradients";
    {
        const ModelConfig cfg{1, 8, 2, 4, 11, 6, Dtype::f64};
        const double rel = model_grad_check(cfg, 2, 4, 7);
        check(out, suite, "model gradients match finite differences", rel < 1e-5,
              max_detail(rel, 1e-5));
    }
    {
        const ModelConfig source{1, 4, 1, 2, 7, 6, Dtype::f64};
        ModelConfig target = source;
        target.num_layers = 2;
        target.hidden = 6;
        target.heads = 2;
        const double rel = ligo_grad_check(source, target, 2, 4, 9);
        check(out, suite, "operator gradients match finite differences", rel < 1e-5,
              max_detail(rel, 1e-5));
    }
}

} // namespace

std::vector<CheckResult> run_verify_suite(const std::string& suite) {
    std::vector<CheckResult> out;
    if (suite == "algebra")
        run_algebra(out);
    else if (suite == "special-cases")
        run_special_cases(out);
    else if (suite == "gradients")
        run_gradients(out);
    else if (suite == "all") {
        run_algebra(out);
        run_special_cases(out);
        run_gradients(out);
    } else {
        throw spec_error("unknown verify suite '" + suite +
                         "' (expected algebra, special-cases, gradients or all)");
    }
    return out;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
    std::ostringstream os;
    for (const CheckResult& r : results) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "[%s] %-14s %-55s %s\n", r.passed ? "PASS" : "FAIL",
                      r.suite.c_str(), r.name.c_str(), r.detail.c_str());
        os << buf;
    }
    return os.str();
}

} // namespace ligo
