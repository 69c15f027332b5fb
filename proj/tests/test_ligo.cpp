#include <catch2/catch_amalgamated.hpp>

#include "ligo/corpus.hpp"
#include "ligo/ligo.hpp"
#include "ligo/verify.hpp"

using namespace ligo;

namespace {

const ModelConfig kSource{2, 6, 2, 4, 13, 10, Dtype::f64};

ModelConfig wider_deeper() {
    ModelConfig t = kSource;
    t.num_layers = 4;
    t.hidden = 10;
    return t;
}

ParamSet<double> seeded_params(std::uint64_t seed, const ModelConfig& cfg = kSource) {
    return init_random<double>(cfg, RngState(seed));
}

} // namespace

TEST_CASE("ligo_init with equal dims and zero noise is the identity operator") {
    const auto p =
        ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, kSource, RngState(1), 0.0);
    CHECK(p.b_emb == MatD::identity(6));
    for (int l = 0; l < 2; ++l) {
        CHECK(p.b_q[l] == MatD::identity(6));
        CHECK(p.b_k[l] == MatD::identity(6));
        CHECK(p.b_v[l] == MatD::identity(6));
        CHECK(p.b_fc1[l] == MatD::identity(24));
    }
    CHECK(p.w_q == MatD::identity(2));
    CHECK(p.w_ln2 == MatD::identity(2));

    const auto params = seeded_params(2);
    CHECK(max_param_diff(ligo_expand(params, p), params) == 0.0);
}

TEST_CASE("noise-free stack_net2net init equals net2net followed by stacking") {
    const ModelConfig target = wider_deeper();
    ModelConfig mid = kSource;
    mid.hidden = target.hidden;
    const std::uint64_t seed = 77;

    const auto params = seeded_params(3);
    const auto p = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                     RngState(seed), 0.0);
    const auto via_ligo = ligo_expand(params, p);

    const auto widened = grow_net2net_width(params, {kSource, mid, Operator::net2net, seed});
    const auto composed = grow_stack(widened, {mid, target, Operator::stack, seed});
    CHECK(max_param_diff(via_ligo, composed) == 0.0);
}

TEST_CASE("ligo_init is deterministic and the noise actually perturbs") {
    const ModelConfig target = wider_deeper();
    const auto a = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                     RngState(4));
    const auto b = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                     RngState(4));
    CHECK(a == b);
    const auto quiet = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                         RngState(4), 0.0);
    CHECK(max_abs_diff(a.b_emb, quiet.b_emb) > 0.0);
    CHECK(max_abs_diff(a.b_emb, quiet.b_emb) < 1e-2); // noise is small

    const auto r = ligo_init<double>(LigoInitStrategy::random_small, kSource, target,
                                     RngState(4));
    CHECK(max_abs_diff(r.b_emb, a.b_emb) > 0.0);
}

TEST_CASE("ligo_init rejects shrinking targets") {
    ModelConfig smaller = kSource;
    smaller.hidden = 4;
    CHECK_THROWS_AS(ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, smaller,
                                      RngState(0)),
                    spec_error);
}

TEST_CASE("expansion is linear in the source parameters") {
    const ModelConfig target = wider_deeper();
    const auto p = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                     RngState(5));
    const auto a = seeded_params(6);
    const auto b = seeded_params(7);
    const double alpha = 0.7, beta = -1.3;

    ParamSet<double> combo = a;
    for (const ParamKey& key : param_keys(kSource)) {
        scale(combo.at(key), alpha);
        add_scaled(combo.at(key), b.at(key), beta);
    }
    const auto lhs = ligo_expand(combo, p);

    auto ea = ligo_expand(a, p);
    const auto eb = ligo_expand(b, p);
    for (const ParamKey& key : param_keys(target)) {
        scale(ea.at(key), alpha);
        add_scaled(ea.at(key), eb.at(key), beta);
    }
    CHECK(max_param_diff(lhs, ea) < 1e-12);
}

TEST_CASE("constructors reproduce their baseline operators") {
    for (std::uint64_t seed : {30u, 31u, 32u}) {
        const auto params = seeded_params(seed);

        ModelConfig deeper = kSource;
        deeper.num_layers = 6;
        const auto stacked = grow_stack(params, {kSource, deeper, Operator::stack, seed});
        CHECK(max_param_diff(ligo_expand(params, ligo_from_stack<double>(kSource, deeper)),
                             stacked) < 1e-12);

        const auto interp =
            grow_interpolate(params, {kSource, deeper, Operator::interpolate, seed});
        CHECK(max_param_diff(
                  ligo_expand(params, ligo_from_interpolation<double>(kSource, deeper)),
                  interp) < 1e-12);

        ModelConfig wider = kSource;
        wider.hidden = 10;
        const auto widened =
            grow_net2net_width(params, {kSource, wider, Operator::net2net, seed});
        CHECK(max_param_diff(
                  ligo_expand(params, ligo_from_net2net<double>(kSource, wider, RngState(seed))),
                  widened) < 1e-12);
    }
}

TEST_CASE("constructors enforce their operators' constraints") {
    ModelConfig odd_depth = kSource;
    odd_depth.num_layers = 3;
    CHECK_THROWS_AS(ligo_from_stack<double>(kSource, odd_depth), spec_error);
    ModelConfig wider = kSource;
    wider.hidden = 10;
    wider.num_layers = 4;
    CHECK_THROWS_AS(ligo_from_net2net<double>(kSource, wider, RngState(0)), spec_error);
}

TEST_CASE("dense assembly matches the factorized path on the tiny MLP instance") {
    RngState rng(9);
    const auto op = UniformLigoOperator<double>::random(2, 4, 3, 5, rng);
    const MatD m = op.assemble_dense_m();
    CHECK(m.rows() == 4 * 25);
    CHECK(m.cols() == 2 * 9);

    std::vector<MatD> theta;
    for (int l = 0; l < 2; ++l) {
        MatD w(3, 3);
        fill_normal(w, rng, 1.0);
        theta.push_back(std::move(w));
    }
    const MatD dense = matmul(m, UniformLigoOperator<double>::vec_layers(theta));
    const MatD fact = UniformLigoOperator<double>::vec_layers(op.expand(theta));
    CHECK(max_abs_diff(dense, fact) < 1e-12);
}

TEST_CASE("dense assembly respects the materialization cap") {
    RngState rng(10);
    const auto op = UniformLigoOperator<double>::random(2, 4, 3, 5, rng);
    CHECK_THROWS_AS(op.assemble_dense_m(100), size_error);
}

TEST_CASE("stacking-pattern dense operator maps vec(theta) to the stacked vec") {
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

    RngState rng(11);
    std::vector<MatD> theta;
    for (int l = 0; l < l1; ++l) {
        MatD w(d, d);
        fill_normal(w, rng, 1.0);
        theta.push_back(std::move(w));
    }
    const MatD mapped = matmul(op.assemble_dense_m(), UniformLigoOperator<double>::vec_layers(theta));
    std::vector<MatD> stacked = {theta[0], theta[1], theta[0], theta[1]};
    CHECK(mapped == UniformLigoOperator<double>::vec_layers(stacked));
}

TEST_CASE("operator parameter count matches the closed form") {
    const ModelConfig target = wider_deeper();
    auto p = zeros_ligo<double>(kSource, target);
    std::uint64_t total = 0;
    for (auto& [name, mat] : ligo_tensors(p)) total += mat->size();
    CHECK(total == ligo_param_count(kSource, target));

    // with ffn_mult = 4 this is the D2 D1 + L1 (3 D2 D1 + 16 D2 D1) + 8 L2 L1 form
    const std::uint64_t dd = std::uint64_t(target.hidden) * kSource.hidden;
    CHECK(ligo_param_count(kSource, target) ==
          dd + kSource.num_layers * (3 * dd + 16 * dd) +
              8ull * target.num_layers * kSource.num_layers);
}

TEST_CASE("ligo_learn with zero steps returns the init bit-identically") {
    const ModelConfig target = wider_deeper();
    const auto params = seeded_params(12);
    const auto init = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                        RngState(13));
    const auto out = ligo_learn(params, init, {}, 0);
    CHECK(out == init);
}

TEST_CASE("ligo_learn without a data stream is an input error") {
    const ModelConfig target = wider_deeper();
    const auto params = seeded_params(14);
    const auto init = ligo_init<double>(LigoInitStrategy::stack_net2net, kSource, target,
                                        RngState(15));
    CHECK_THROWS_AS(ligo_learn(params, init, {}, 5), data_error);
}

TEST_CASE("operator gradients through expand-forward-loss match finite differences") {
    const ModelConfig source{1, 4, 1, 2, 7, 6, Dtype::f64};
    ModelConfig target = source;
    target.num_layers = 2;
    target.hidden = 6;
    target.heads = 2;
    CHECK(ligo_param_count(source, target) + param_count(source) <= 10000);
    CHECK(ligo_grad_check(source, target, 2, 4, 16) < 1e-5);
}

TEST_CASE("a hundred learning steps beat the raw init on held-out data") {
    // char-LM setup mirroring the documented workflow at miniature scale
    const ModelConfig source{1, 8, 2, 4, 32, 16, Dtype::f64};
    ModelConfig target = source;
    target.num_layers = 2;
    target.hidden = 12;
    const Corpus corpus = load_corpus("synthetic:seed=5,bytes=60000", VocabMode::char_level);
    REQUIRE(corpus.vocab_size() <= source.vocab);

    const auto eval_set = fixed_eval_batches(corpus, 4, 12, 2);
    double init_total = 0.0, learned_total = 0.0;
    for (std::uint64_t seed : {101u, 102u, 103u}) {
        const auto small = init_random<double>(source, RngState(seed).fork("model"));
        const auto init = ligo_init<double>(LigoInitStrategy::stack_net2net, source, target,
                                            RngState(seed));
        BatchSampler sampler(corpus, 4, 12, RngState(seed).fork("ligo_data"));
        const auto learned =
            ligo_learn(small, init, [&]() { return sampler.next(); }, 100);
        init_total += evaluate(ligo_expand(small, init), eval_set);
        learned_total += evaluate(ligo_expand(small, learned), eval_set);
    }
    CHECK(learned_total / 3.0 < init_total / 3.0);
}
