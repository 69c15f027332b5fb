// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line each. Exits 0 only if all criteria hold.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ligo/checkpoint.hpp"
#include "ligo/corpus.hpp"
#include "ligo/ligo.hpp"
#include "ligo/trainer.hpp"
#include "ligo/verify.hpp"

using namespace ligo;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

class Timer {
  public:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const std::string& msg) { std::cerr << "  .. " << msg << "\n"; }

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LIGO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::trunc);
    f << text;
}

// ---------------------------------------------------------------------------
// Criterion 1: dense/factorized operator equivalence on the uniform MLP
// instance (D1=3, D2=5, L1=2, L2=4), < 1e-12, in under a second.
// ---------------------------------------------------------------------------
CriterionResult criterion_dense_equivalence() {
    Timer timer;
    RngState rng(1001);
    const auto op = UniformLigoOperator<double>::random(2, 4, 3, 5, rng);
    std::vector<MatD> theta;
    for (int l = 0; l < 2; ++l) {
        MatD w(3, 3);
        fill_normal(w, rng, 1.0);
        theta.push_back(std::move(w));
    }
    const MatD m = op.assemble_dense_m();
    const MatD dense = matmul(m, UniformLigoOperator<double>::vec_layers(theta));
    const MatD fact = UniformLigoOperator<double>::vec_layers(op.expand(theta));
    const double diff = max_abs_diff(dense, fact);
    const double secs = timer.elapsed();

    CriterionResult r{1, "dense/factorized equivalence (uniform MLP 3->5, 2->4)"};
    r.seconds = secs;
    r.passed = diff < 1e-12 && m.rows() == 4 * 25 && m.cols() == 2 * 9 && secs < 1.0;
    r.detail = fmt("max |M vec(theta) - vec(expand)| = %.3g (tol 1e-12), %.2fs (limit 1s)", diff,
                   secs);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 2: the three constructors reproduce their baseline operators on
// 10 seeded instances each, < 1e-12, in under ten seconds.
// ---------------------------------------------------------------------------
CriterionResult criterion_special_cases() {
    Timer timer;
    const ModelConfig source{2, 6, 2, 4, 13, 10, Dtype::f64};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto params = init_random<double>(source, RngState(seed));

        ModelConfig deeper = source;
        deeper.num_layers = 6;
        worst = std::max(worst,
                         max_param_diff(ligo_expand(params, ligo_from_stack<double>(source, deeper)),
                                        grow_stack(params, {source, deeper, Operator::stack, seed})));
        worst = std::max(
            worst, max_param_diff(
                       ligo_expand(params, ligo_from_interpolation<double>(source, deeper)),
                       grow_interpolate(params, {source, deeper, Operator::interpolate, seed})));

        ModelConfig wider = source;
        wider.hidden = 10;
        worst = std::max(
            worst,
            max_param_diff(
                ligo_expand(params, ligo_from_net2net<double>(source, wider, RngState(seed))),
                grow_net2net_width(params, {source, wider, Operator::net2net, seed})));
    }
    const double secs = timer.elapsed();
    CriterionResult r{2, "special-case constructors reproduce stack/interpolate/net2net"};
    r.seconds = secs;
    r.passed = worst < 1e-12 && secs < 10.0;
    r.detail = fmt("max |expand(constructor) - baseline| = %.3g over 30 instances (tol 1e-12), "
                   "%.2fs (limit 10s)",
                   worst, secs);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 3: Net2Net function preservation on 20 seeded 2-layer MLPs
// (hidden 2->3 and 4->7), 100 random inputs each, < 1e-12.
// ---------------------------------------------------------------------------
CriterionResult criterion_net2net_preservation() {
    Timer timer;
    double worst = 0.0;
    int instances = 0;
    for (const auto& [d1, d2] : std::vector<std::pair<int, int>>{{2, 3}, {4, 7}}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            RngState rng(seed * 100 + d1);
            MlpStack<double> mlp;
            mlp.layers.push_back(MatD(d1, 3));
            mlp.layers.push_back(MatD(2, d1));
            for (auto& w : mlp.layers) fill_normal(w, rng, 1.0);
            const std::vector<Selection> sels = {draw_selection(d1, d2, rng)};
            const auto grown = grow_net2net_mlp(mlp, sels);
            MatD x(3, 100);
            fill_normal(x, rng, 1.0);
            worst = std::max(worst, max_abs_diff(mlp.apply(x), grown.apply(x)));
            ++instances;
        }
    }
    CriterionResult r{3, "net2net widening is function preserving on MLP stacks"};
    r.seconds = timer.elapsed();
    r.passed = worst < 1e-12 && instances == 20;
    r.detail = fmt("max output drift %.3g over %d instances x 100 inputs (tol 1e-12)", worst,
                   instances);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients (model and operator) vs central finite
// differences, rel err < 1e-5 on <= 1e4 parameter instances, under 60 s.
// ---------------------------------------------------------------------------
CriterionResult criterion_gradients() {
    Timer timer;
    const ModelConfig model_cfg{1, 8, 2, 4, 11, 4, Dtype::f64};
    const double model_rel = model_grad_check(model_cfg, 2, 4, 4001);

    const ModelConfig op_source{1, 4, 1, 2, 7, 6, Dtype::f64};
    ModelConfig op_target = op_source;
    op_target.num_layers = 2;
    op_target.hidden = 6;
    op_target.heads = 2;
    const double op_rel = ligo_grad_check(op_source, op_target, 2, 4, 4002);

    const double secs = timer.elapsed();
    CriterionResult r{4, "analytic gradients match finite differences"};
    r.seconds = secs;
    r.passed = model_rel < 1e-5 && op_rel < 1e-5 && secs < 60.0 &&
               param_count(model_cfg) <= 10000 &&
               ligo_param_count(op_source, op_target) <= 10000;
    r.detail = fmt("model rel err %.3g, operator rel err %.3g (tol 1e-5), %.1fs (limit 60s)",
                   model_rel, op_rel, secs);
    return r;
}

// ---------------------------------------------------------------------------
// Criteria 5-7 share the desk-scale experiment.
// ---------------------------------------------------------------------------

struct DeskScaleConfig {
    ModelConfig small{2, 64, 2, 4, 96, 64, Dtype::f32};
    ModelConfig target{4, 128, 4, 4, 96, 64, Dtype::f32};
    std::string corpus_spec = "synthetic:seed=42,bytes=1048576";
    int batch = 8;
    int seq = 16;
    double lr = 1e-3;
    int warmup = 50;
    int eval_every = 50;
    int eval_batches = 4;
    int small_steps = 2000;
    int scratch_steps = 1520;
    int ligo_train_steps = 1300;
    int ligo_steps = 100;
    std::vector<std::uint64_t> seeds{1, 2, 3};
};

TrainConfig make_train_config(const DeskScaleConfig& desk, int steps, std::uint64_t seed) {
    TrainConfig t;
    t.steps = steps;
    t.batch_size = desk.batch;
    t.seq_len = desk.seq;
    t.lr = desk.lr;
    t.warmup_steps = desk.warmup;
    t.eval_every = desk.eval_every;
    t.eval_batches = desk.eval_batches;
    t.seed = seed;
    t.deterministic = true;
    return t;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    ParamSet<float> small_params;
    double step0_random = 0.0;
    double step0_ligo = 0.0;
    std::map<std::string, double> step0_baselines;
    double target_loss = 0.0; // scratch eval at step 1500
    std::vector<MetricsRecord> scratch_curve;
    std::vector<MetricsRecord> ligo_curve;
    double savings_pct = 0.0;
    bool ligo_reached = false;
    std::uint64_t ligo_flops = 0, scratch_flops = 0;
    bool flops_linear = true;
};

SeedOutcome run_desk_seed(const DeskScaleConfig& desk, const Corpus& corpus,
                          std::uint64_t seed) {
    SeedOutcome out;
    out.seed = seed;
    const auto eval_set =
        fixed_eval_batches(corpus, desk.batch, desk.seq, desk.eval_batches);
    const std::uint64_t step_flops_target = flops_per_step(desk.target, desk.batch, desk.seq);

    // small pretrained model
    {
        auto params =
            init_random<float>(desk.small, RngState(seed).fork("small_init"));
        std::vector<MetricsRecord> metrics;
        out.small_params = train(std::move(params),
                                 corpus, make_train_config(desk, desk.small_steps, seed), 0,
                                 metrics);
        note(fmt("seed %llu: small model pretrained, eval %.4f",
                 (unsigned long long)seed, metrics.back().eval_loss.value_or(0.0)));
    }

    // scratch run of the target architecture
    {
        auto params =
            init_random<float>(desk.target, RngState(seed).fork("scratch_init"));
        train(std::move(params), corpus,
              make_train_config(desk, desk.scratch_steps, seed + 1000), 0, out.scratch_curve);
        out.step0_random = *out.scratch_curve.front().eval_loss;
        for (const MetricsRecord& rec : out.scratch_curve) {
            if (rec.step == 1500 && rec.eval_loss) out.target_loss = *rec.eval_loss;
            if (rec.flops_cum != std::uint64_t(rec.step) * step_flops_target)
                out.flops_linear = false;
        }
        note(fmt("seed %llu: scratch step-1500 eval %.4f", (unsigned long long)seed,
                 out.target_loss));
    }

    // learned-operator run, the 100 learning steps charged up front
    {
        auto init = ligo_init<float>(LigoInitStrategy::stack_net2net, desk.small, desk.target,
                                     RngState(seed));
        BatchSampler sampler(corpus, desk.batch, desk.seq, RngState(seed).fork("ligo_data"));
        auto learned = ligo_learn(out.small_params, std::move(init),
                                  [&]() { return sampler.next(); }, desk.ligo_steps);
        auto grown = ligo_expand(out.small_params, learned);
        out.step0_ligo = evaluate(grown, eval_set);
        const std::uint64_t carry = std::uint64_t(desk.ligo_steps) * step_flops_target;
        train(std::move(grown), corpus,
              make_train_config(desk, desk.ligo_train_steps, seed + 2000), carry,
              out.ligo_curve);
        for (const MetricsRecord& rec : out.ligo_curve)
            if (rec.flops_cum != carry + std::uint64_t(rec.step) * step_flops_target)
                out.flops_linear = false;
        note(fmt("seed %llu: ligo step-0 eval %.4f", (unsigned long long)seed, out.step0_ligo));
    }

    // non-learned baselines: width stage then depth stage
    {
        ModelConfig mid = desk.small;
        mid.hidden = desk.target.hidden;
        mid.heads = desk.target.heads;
        for (const Operator width_op : {Operator::net2net, Operator::copy}) {
            const auto widened =
                width_op == Operator::net2net
                    ? grow_net2net_width(out.small_params, {desk.small, mid, width_op, seed})
                    : grow_copy(out.small_params, {desk.small, mid, width_op, seed});
            for (const Operator depth_op : {Operator::stack, Operator::interpolate}) {
                const auto grown =
                    depth_op == Operator::stack
                        ? grow_stack(widened, {mid, desk.target, depth_op, seed})
                        : grow_interpolate(widened, {mid, desk.target, depth_op, seed});
                const std::string name = std::string(operator_name(width_op)) + "+" +
                                         operator_name(depth_op);
                out.step0_baselines[name] = evaluate(grown, eval_set);
            }
        }
    }

    // savings vs scratch at the scratch step-1500 loss
    const CompareReport report = compare_runs(
        {{"scratch", out.scratch_curve}, {"ligo", out.ligo_curve}}, out.target_loss, "scratch");
    for (const RunComparison& row : report.rows) {
        if (row.name == "ligo") {
            out.ligo_reached = row.reached;
            out.ligo_flops = row.flops_to_target;
            out.savings_pct = row.savings_pct;
        } else {
            out.scratch_flops = row.flops_to_target;
        }
    }
    note(fmt("seed %llu: savings %.1f%%", (unsigned long long)seed, out.savings_pct));
    return out;
}

// ---------------------------------------------------------------------------
// Criterion 5: desk-scale acceleration.
// ---------------------------------------------------------------------------
CriterionResult criterion_acceleration(const DeskScaleConfig& desk,
                                       const std::vector<SeedOutcome>& outcomes) {
    CriterionResult r{5, "desk-scale acceleration of the learned operator"};
    double ligo0 = 0, random0 = 0, savings = 0;
    std::map<std::string, double> base0;
    bool all_reached = true, all_cheaper = true;
    for (const SeedOutcome& o : outcomes) {
        ligo0 += o.step0_ligo;
        random0 += o.step0_random;
        savings += o.savings_pct;
        for (const auto& [name, v] : o.step0_baselines) base0[name] += v;
        all_reached = all_reached && o.ligo_reached;
        all_cheaper = all_cheaper && o.ligo_reached && o.ligo_flops < o.scratch_flops;
    }
    const double n = double(outcomes.size());
    ligo0 /= n;
    random0 /= n;
    savings /= n;

    bool beats_baselines = true;
    std::ostringstream base_detail;
    for (auto& [name, v] : base0) {
        v /= n;
        beats_baselines = beats_baselines && ligo0 <= v;
        base_detail << " " << name << " " << fmt("%.4f", v);
    }

    r.passed = ligo0 < random0 && beats_baselines && all_reached && all_cheaper && savings > 0.0;
    r.detail = fmt("mean step-0 eval: ligo %.4f vs random %.4f, baselines:%s; mean savings "
                   "%.1f%% (need > 0), all seeds reached=%d",
                   ligo0, random0, base_detail.str().c_str(), savings, all_reached ? 1 : 0);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 6: effect of the number of operator learning steps, driven
// through the CLI. Step-0 eval must be non-increasing over {0, 100, 500};
// one inversion across seeds is reported, two fail.
// ---------------------------------------------------------------------------
CriterionResult criterion_step_ablation(const DeskScaleConfig& desk, const Corpus& corpus,
                                        const fs::path& dir,
                                        const std::vector<SeedOutcome>& outcomes) {
    Timer timer;
    CriterionResult r{6, "operator learning-step ablation via cmd_grow"};

    const std::string target_cfg_text = fmt(
        "[model]\nlayers = %d\nhidden = %d\nheads = %d\nffn_mult = 4\nvocab = %d\n"
        "seq_len = %d\ndtype = f32\n\n[train]\nsteps = 1\nbatch_size = %d\nseq_len = %d\n"
        "lr = %g\neval_every = 50\neval_batches = %d\nseed = 0\ndeterministic = true\n",
        desk.target.num_layers, desk.target.hidden, desk.target.heads, desk.target.vocab,
        desk.target.seq_len, desk.batch, desk.seq, desk.lr, desk.eval_batches);
    const fs::path target_cfg = dir / "target.cfg";
    write_file(target_cfg, target_cfg_text);

    const auto eval_set = fixed_eval_batches(corpus, desk.batch, desk.seq, desk.eval_batches);
    const std::vector<int> step_grid{0, 100, 500};

    int inversions = 0;
    std::ostringstream detail;
    for (const SeedOutcome& o : outcomes) {
        const fs::path small_ckpt = dir / fmt("small_seed%llu.ckpt", (unsigned long long)o.seed);
        save_checkpoint(small_ckpt, o.small_params);

        std::vector<double> evals;
        for (int steps : step_grid) {
            const fs::path out_ckpt =
                dir / fmt("ablation_s%llu_%d.ckpt", (unsigned long long)o.seed, steps);
            const int rc = run_cli(fmt(
                "grow --from %s --target-config %s --operator ligo --ligo-steps %d "
                "--corpus %s --seed %llu --out %s",
                small_ckpt.c_str(), target_cfg.c_str(), steps, desk.corpus_spec.c_str(),
                (unsigned long long)o.seed, out_ckpt.c_str()));
            if (rc != 0) {
                r.detail = fmt("cmd_grow exited %d for seed %llu steps %d", rc,
                               (unsigned long long)o.seed, steps);
                r.seconds = timer.elapsed();
                return r;
            }
            auto grown = load_checkpoint(out_ckpt);
            evals.push_back(evaluate(grown.model<float>(), eval_set));
        }
        detail << fmt(" seed %llu: %.4f/%.4f/%.4f", (unsigned long long)o.seed, evals[0],
                      evals[1], evals[2]);
        for (std::size_t i = 0; i + 1 < evals.size(); ++i)
            if (evals[i + 1] > evals[i]) ++inversions;
        note(fmt("seed %llu ablation evals 0/100/500:%s", (unsigned long long)o.seed,
                 detail.str().c_str()));
    }

    r.seconds = timer.elapsed();
    r.passed = inversions <= 1;
    r.detail = fmt("step-0 evals over {0,100,500}:%s; %d inversion(s) (1 reported, 2 fail)",
                   detail.str().c_str(), inversions);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 7: structure and accounting.
// ---------------------------------------------------------------------------
CriterionResult criterion_accounting(const DeskScaleConfig& desk,
                                     const std::vector<SeedOutcome>& outcomes) {
    CriterionResult r{7, "parameter counts and flops accounting are exact"};

    // grown checkpoints match the target schema exactly
    bool counts_ok = true;
    {
        const SeedOutcome& o = outcomes.front();
        auto p = ligo_init<float>(LigoInitStrategy::stack_net2net, desk.small, desk.target,
                                  RngState(o.seed));
        const auto grown = ligo_expand(o.small_params, p);
        std::uint64_t total = 0;
        for (const auto& [key, tensor] : grown.tensors) total += tensor.size();
        counts_ok = counts_ok && total == param_count(desk.target);

        ModelConfig deeper = desk.small;
        deeper.num_layers = 4;
        const auto stacked =
            grow_stack(o.small_params, {desk.small, deeper, Operator::stack, o.seed});
        std::uint64_t stacked_total = 0;
        for (const auto& [key, tensor] : stacked.tensors) stacked_total += tensor.size();
        counts_ok = counts_ok && stacked_total == param_count(deeper);
    }

    // operator parameter count: closed form vs walked tensors
    bool ligo_count_ok = true;
    {
        auto p = zeros_ligo<float>(desk.small, desk.target);
        std::uint64_t walked = 0;
        for (auto& [name, mat] : ligo_tensors(p)) walked += mat->size();
        const std::uint64_t dd = std::uint64_t(desk.target.hidden) * desk.small.hidden;
        const std::uint64_t closed =
            dd + std::uint64_t(desk.small.num_layers) * (3 * dd + 16 * dd) +
            8ull * desk.target.num_layers * desk.small.num_layers;
        ligo_count_ok = walked == closed && ligo_param_count(desk.small, desk.target) == closed;
    }

    bool linear_ok = true;
    for (const SeedOutcome& o : outcomes) linear_ok = linear_ok && o.flops_linear;

    r.passed = counts_ok && ligo_count_ok && linear_ok;
    r.detail = fmt("schema counts %s, operator count formula %s, flops_cum linearity %s",
                   counts_ok ? "exact" : "WRONG", ligo_count_ok ? "exact" : "WRONG",
                   linear_ok ? "exact" : "WRONG");
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical reproducibility of the full pipeline.
// ---------------------------------------------------------------------------
CriterionResult criterion_reproducibility(const fs::path& dir) {
    Timer timer;
    CriterionResult r{8, "full pipeline is byte-reproducible under fixed seeds"};

    const char* small_cfg = "[model]\nlayers = 1\nhidden = 8\nheads = 2\nffn_mult = 4\n"
                            "vocab = 32\nseq_len = 16\ndtype = f32\n\n"
                            "[train]\nsteps = 30\nbatch_size = 2\nseq_len = 8\nlr = 1e-3\n"
                            "eval_every = 10\neval_batches = 1\nseed = 9\ndeterministic = true\n";
    const char* target_cfg = "[model]\nlayers = 2\nhidden = 12\nheads = 2\nffn_mult = 4\n"
                             "vocab = 32\nseq_len = 16\ndtype = f32\n\n"
                             "[train]\nsteps = 20\nbatch_size = 2\nseq_len = 8\nlr = 1e-3\n"
                             "eval_every = 10\neval_batches = 1\nseed = 9\ndeterministic = true\n";
    const std::string corpus = "synthetic:seed=13,bytes=40000";

    auto pipeline = [&](const fs::path& sub) -> bool {
        fs::create_directories(sub);
        write_file(sub / "small.cfg", small_cfg);
        write_file(sub / "target.cfg", target_cfg);
        if (run_cli(fmt("pretrain --config %s --corpus %s --out %s", (sub / "small.cfg").c_str(),
                        corpus.c_str(), (sub / "small.ckpt").c_str())) != 0)
            return false;
        if (run_cli(fmt("grow --from %s --target-config %s --operator ligo --ligo-steps 5 "
                        "--corpus %s --out %s",
                        (sub / "small.ckpt").c_str(), (sub / "target.cfg").c_str(),
                        corpus.c_str(), (sub / "grown.ckpt").c_str())) != 0)
            return false;
        if (run_cli(fmt("train --from %s --config %s --corpus %s --out %s",
                        (sub / "grown.ckpt").c_str(), (sub / "target.cfg").c_str(),
                        corpus.c_str(), (sub / "final.ckpt").c_str())) != 0)
            return false;
        return true;
    };

    const fs::path a = dir / "repro_a", b = dir / "repro_b";
    if (!pipeline(a) || !pipeline(b)) {
        r.detail = "pipeline command failed";
        r.seconds = timer.elapsed();
        return r;
    }

    bool identical = true;
    std::ostringstream mismatch;
    for (const char* name : {"small.ckpt", "small.csv", "grown.ckpt", "grown.ligo.ckpt",
                             "final.ckpt", "final.csv"}) {
        if (slurp(a / name) != slurp(b / name)) {
            identical = false;
            mismatch << " " << name;
        }
    }
    r.passed = identical;
    r.seconds = timer.elapsed();
    r.detail = identical ? "checkpoints and metrics byte-identical across reruns"
                         : ("mismatch in:" + mismatch.str());
    return r;
}

} // namespace

int main() {
    const fs::path dir =
        fs::temp_directory_path() / ("ligo_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    std::vector<CriterionResult> results;
    results.push_back(criterion_dense_equivalence());
    results.push_back(criterion_special_cases());
    results.push_back(criterion_net2net_preservation());
    results.push_back(criterion_gradients());

    // desk-scale experiment shared by criteria 5-7
    const DeskScaleConfig desk;
    note("loading the 1 MiB synthetic corpus");
    const Corpus corpus = load_corpus(desk.corpus_spec, VocabMode::char_level);

    Timer desk_timer;
    std::vector<std::future<SeedOutcome>> futures;
    for (std::uint64_t seed : desk.seeds)
        futures.push_back(std::async(std::launch::async,
                                     [&, seed]() { return run_desk_seed(desk, corpus, seed); }));
    std::vector<SeedOutcome> outcomes;
    for (auto& f : futures) outcomes.push_back(f.get());

    CriterionResult c5 = criterion_acceleration(desk, outcomes);
    c5.seconds = desk_timer.elapsed();
    results.push_back(c5);
    results.push_back(criterion_step_ablation(desk, corpus, dir, outcomes));
    results.push_back(criterion_accounting(desk, outcomes));
    results.push_back(criterion_reproducibility(dir));

    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    bool all = true;
    for (const CriterionResult& r : results) {
        all = all && r.passed;
        std::printf("[%s] criterion %d (%.1fs): %s — %s\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.seconds, r.name.c_str(), r.detail.c_str());
    }
    std::printf(all ? "all acceptance criteria passed\n" : "ACCEPTANCE FAILURES PRESENT\n");

    fs::remove_all(dir);
    return all ? 0 : 1;
}
