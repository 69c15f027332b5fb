// ligo: grow small pretrained transformers into larger ones and measure the
// training compute saved.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 data error, 4 divergence, 5 strict-compare target not reached.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ligo/checkpoint.hpp"
#include "ligo/config_file.hpp"
#include "ligo/corpus.hpp"
#include "ligo/ligo.hpp"
#include "ligo/manifest.hpp"
#include "ligo/trainer.hpp"
#include "ligo/verify.hpp"

namespace fs = std::filesystem;
using namespace ligo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitStrictCompare = 5;

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

fs::path with_suffix(const fs::path& p, const std::string& tag) {
    fs::path out = p;
    const std::string ext = out.extension().string();
    out.replace_extension();
    out += tag;
    out += ext;
    return out;
}

fs::path csv_path_for(const fs::path& ckpt) {
    fs::path p = ckpt;
    p.replace_extension(".csv");
    return p;
}

nlohmann::json train_config_to_json(const TrainConfig& t) {
    return {{"steps", t.steps},
            {"batch_size", t.batch_size},
            {"seq_len", t.seq_len},
            {"optimizer", optimizer_name(t.optimizer)},
            {"lr", t.lr},
            {"warmup_steps", t.warmup_steps},
            {"eval_every", t.eval_every},
            {"eval_batches", t.eval_batches},
            {"seed", t.seed},
            {"deterministic", t.deterministic}};
}

struct TrainOutputs {
    fs::path ckpt;
    fs::path csv;
    fs::path manifest;
};

TrainOutputs output_paths(const fs::path& out) {
    return {out, csv_path_for(out), manifest_path_for(out)};
}

// Streams metrics rows to the CSV as they are produced, so a diverged run
// still leaves its diagnostic tail on disk.
template <class T>
ParamSet<T> run_training(ParamSet<T> params, const Corpus& corpus, const TrainConfig& tcfg,
                         std::uint64_t flops_carry, const fs::path& csv) {
    std::ofstream f(csv, std::ios::trunc);
    if (!f) throw io_error("cannot write metrics csv: " + csv.string());
    write_metrics_header(f);
    std::vector<MetricsRecord> metrics;
    return train(std::move(params), corpus, tcfg, flops_carry, metrics,
                 [&](const MetricsRecord& rec) {
                     write_metrics_row(f, rec);
                     f.flush();
                 });
}

template <class T>
int do_pretrain(const FileConfig& cfg, const std::string& corpus_src, VocabMode vmode,
                const fs::path& out, const std::string& cmdline) {
    const TrainOutputs paths = output_paths(out);
    const Corpus corpus = load_corpus(corpus_src, vmode);

    RunManifest manifest;
    manifest.command_line = cmdline;
    manifest.created_utc = utc_timestamp();
    manifest.resolved_config = {{"model", model_config_to_json(cfg.model)},
                                {"train", train_config_to_json(cfg.train)},
                                {"corpus", corpus_src}};
    manifest.outputs = {paths.ckpt.string(), paths.csv.string()};
    write_manifest(paths.manifest, manifest);

    ParamSet<T> params = init_random<T>(cfg.model, RngState(cfg.train.seed).fork("model_init"));
    params = run_training(std::move(params), corpus, cfg.train, 0, paths.csv);
    save_checkpoint(paths.ckpt, params,
                    std::uint64_t(cfg.train.steps) *
                        flops_per_step(cfg.model, cfg.train.batch_size, cfg.train.seq_len),
                    paths.manifest.string());
    std::cout << "wrote " << paths.ckpt.string() << "\n";
    return kExitOk;
}

template <class T>
int do_train(LoadedCheckpoint&& ckpt, const FileConfig& cfg, const std::string& corpus_src,
             VocabMode vmode, const fs::path& out, const std::string& cmdline,
             const std::string& from) {
    ParamSet<T>& params = ckpt.model<T>();
    if (cfg.has_model) {
        if (!cfg.model.same_arch(params.config))
            throw spec_error("config [model] does not match the checkpoint architecture");
        if (cfg.model.dtype != params.config.dtype)
            throw spec_error("config dtype " + dtype_name(cfg.model.dtype) +
                             " does not match checkpoint dtype " +
                             dtype_name(params.config.dtype));
    }
    const TrainOutputs paths = output_paths(out);
    const Corpus corpus = load_corpus(corpus_src, vmode);

    RunManifest manifest;
    manifest.command_line = cmdline;
    manifest.created_utc = utc_timestamp();
    manifest.resolved_config = {{"model", model_config_to_json(params.config)},
                                {"train", train_config_to_json(cfg.train)},
                                {"corpus", corpus_src},
                                {"flops_carry", ckpt.flops_spent}};
    manifest.input_hashes[from] = hash_file(from);
    manifest.outputs = {paths.ckpt.string(), paths.csv.string()};
    write_manifest(paths.manifest, manifest);

    const std::uint64_t carry = ckpt.flops_spent;
    ParamSet<T> trained = run_training(std::move(params), corpus, cfg.train, carry, paths.csv);
    save_checkpoint(paths.ckpt, trained,
                    carry + std::uint64_t(cfg.train.steps) *
                                flops_per_step(trained.config, cfg.train.batch_size,
                                               cfg.train.seq_len),
                    paths.manifest.string());
    std::cout << "wrote " << paths.ckpt.string() << "\n";
    return kExitOk;
}

template <class T>
int do_grow(LoadedCheckpoint&& ckpt, const FileConfig& target_cfg, Operator op, int ligo_steps,
            LigoInitStrategy init_strategy, const std::string& corpus_src, VocabMode vmode,
            std::uint64_t seed, const fs::path& out, const std::string& cmdline,
            const std::string& from) {
    ParamSet<T>& source_params = ckpt.model<T>();
    GrowthSpec spec{source_params.config, target_cfg.model, op, seed, {}};
    spec.validate();

    double ligo_lr = 1e-3;
    double ligo_noise = kLigoInitNoise;
    if (auto it = target_cfg.grow.find("ligo_lr"); it != target_cfg.grow.end())
        ligo_lr = std::stod(it->second);
    if (auto it = target_cfg.grow.find("ligo_noise"); it != target_cfg.grow.end())
        ligo_noise = std::stod(it->second);

    const TrainOutputs paths = output_paths(out);
    const fs::path ligo_out = with_suffix(out, ".ligo");

    RunManifest manifest;
    manifest.command_line = cmdline;
    manifest.created_utc = utc_timestamp();
    manifest.resolved_config = {{"operator", operator_name(op)},
                                {"source", model_config_to_json(source_params.config)},
                                {"target", model_config_to_json(target_cfg.model)},
                                {"seed", seed}};
    if (op == Operator::ligo) {
        manifest.resolved_config["ligo_steps"] = ligo_steps;
        manifest.resolved_config["ligo_lr"] = ligo_lr;
        manifest.resolved_config["ligo_noise"] = ligo_noise;
        manifest.resolved_config["ligo_init"] =
            init_strategy == LigoInitStrategy::stack_net2net ? "stack_net2net" : "random_small";
        manifest.resolved_config["train"] = train_config_to_json(target_cfg.train);
    }
    manifest.input_hashes[from] = hash_file(from);
    manifest.outputs = {paths.ckpt.string()};
    if (op == Operator::ligo) manifest.outputs.push_back(ligo_out.string());
    write_manifest(paths.manifest, manifest);

    if (op != Operator::ligo) {
        const ParamSet<T> grown = grow(source_params, spec);
        save_checkpoint(paths.ckpt, grown, 0, paths.manifest.string());
        std::cout << "wrote " << paths.ckpt.string() << "\n";
        return kExitOk;
    }

    if (ligo_steps < 0) throw spec_error("--ligo-steps must be >= 0");
    if (!target_cfg.has_train)
        throw spec_error("growing with the learned operator needs a [train] section in the "
                         "target config (batch geometry for the operator steps)");

    LigoParams<T> p = ligo_init<T>(init_strategy, source_params.config, target_cfg.model,
                                   RngState(seed), ligo_noise);
    std::uint64_t flops_spent = 0;
    if (ligo_steps > 0) {
        if (corpus_src.empty())
            throw spec_error("--corpus is required when --ligo-steps > 0");
        const Corpus corpus = load_corpus(corpus_src, vmode);
        BatchSampler sampler(corpus, target_cfg.train.batch_size, target_cfg.train.seq_len,
                             RngState(seed).fork("ligo_data"));
        LigoLearnConfig learn_cfg;
        learn_cfg.lr = ligo_lr;
        p = ligo_learn(source_params, std::move(p), [&]() { return sampler.next(); }, ligo_steps,
                       learn_cfg);
        flops_spent = std::uint64_t(ligo_steps) * flops_per_step(target_cfg.model,
                                                                 target_cfg.train.batch_size,
                                                                 target_cfg.train.seq_len);
    }
    const ParamSet<T> grown = ligo_expand(source_params, p);
    save_checkpoint(paths.ckpt, grown, flops_spent, paths.manifest.string());
    save_checkpoint(ligo_out, p, flops_spent, paths.manifest.string());
    std::cout << "wrote " << paths.ckpt.string() << " and " << ligo_out.string() << "\n";
    return kExitOk;
}

int do_compare(const std::vector<std::string>& run_paths, double target_loss, bool strict,
               const std::string& baseline, const std::string& out_csv) {
    if (run_paths.size() < 2)
        throw spec_error("compare needs at least two --runs metrics files");
    std::vector<RunCurve> runs;
    for (const std::string& path : run_paths)
        runs.push_back({fs::path(path).stem().string(), read_metrics_csv(path)});
    const CompareReport report = compare_runs(runs, target_loss, baseline);
    std::cout << format_compare_report(report);
    if (!out_csv.empty()) {
        std::ofstream f(out_csv, std::ios::trunc);
        if (!f) throw io_error("cannot write report csv: " + out_csv);
        write_compare_csv(f, report);
    }
    if (strict && !report.all_reached) return kExitStrictCompare;
    return kExitOk;
}

int do_verify(const std::string& suite) {
    const std::vector<CheckResult> results = run_verify_suite(suite);
    std::cout << format_check_table(results);
    int failures = 0;
    for (const CheckResult& r : results)
        if (!r.passed) ++failures;
    if (failures > 0) {
        std::cout << failures << " check(s) failed\n";
        return kExitVerifyFailed;
    }
    std::cout << "all " << results.size() << " checks passed\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grow small pretrained transformers into larger ones"};
    app.require_subcommand(1);
    const std::string cmdline = join_args(argc, argv);

    // pretrain ---------------------------------------------------------------
    auto* pre = app.add_subcommand("pretrain", "train a model from random init");
    std::string pre_config, pre_corpus, pre_out, pre_vocab = "char";
    std::optional<std::uint64_t> pre_seed;
    pre->add_option("--config", pre_config, "config file with [model] and [train]")->required();
    pre->add_option("--corpus", pre_corpus, "corpus path or synthetic:... spec")->required();
    pre->add_option("--out", pre_out, "output checkpoint path")->required();
    pre->add_option("--seed", pre_seed, "override [train] seed");
    pre->add_option("--vocab-mode", pre_vocab, "char or byte")->check(CLI::IsMember({"char", "byte"}));

    // grow -------------------------------------------------------------------
    auto* grw = app.add_subcommand("grow", "grow a checkpoint to a larger architecture");
    std::string grw_from, grw_target, grw_operator, grw_corpus, grw_out, grw_init = "stack_net2net",
                grw_vocab = "char";
    int grw_ligo_steps = 100;
    std::optional<std::uint64_t> grw_seed;
    grw->add_option("--from", grw_from, "source checkpoint")->required();
    grw->add_option("--target-config", grw_target, "config file with the target [model]")
        ->required();
    grw->add_option("--operator", grw_operator, "stack|interpolate|net2net|copy|ligo")
        ->required();
    grw->add_option("--ligo-steps", grw_ligo_steps, "operator learning steps (ligo only)");
    grw->add_option("--ligo-init", grw_init, "stack_net2net or random_small")
        ->check(CLI::IsMember({"stack_net2net", "random_small"}));
    grw->add_option("--corpus", grw_corpus, "corpus for operator learning");
    grw->add_option("--vocab-mode", grw_vocab, "char or byte")
        ->check(CLI::IsMember({"char", "byte"}));
    grw->add_option("--seed", grw_seed, "growth seed (default: target config [train] seed)");
    grw->add_option("--out", grw_out, "output checkpoint path")->required();

    // train ------------------------------------------------------------------
    auto* trn = app.add_subcommand("train", "continue training from a checkpoint");
    std::string trn_from, trn_config, trn_corpus, trn_out, trn_vocab = "char";
    std::optional<std::uint64_t> trn_seed;
    trn->add_option("--from", trn_from, "input checkpoint")->required();
    trn->add_option("--config", trn_config, "config file with [train]")->required();
    trn->add_option("--corpus", trn_corpus, "corpus path or synthetic:... spec")->required();
    trn->add_option("--out", trn_out, "output checkpoint path")->required();
    trn->add_option("--seed", trn_seed, "override [train] seed");
    trn->add_option("--vocab-mode", trn_vocab, "char or byte")
        ->check(CLI::IsMember({"char", "byte"}));

    // compare ----------------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "compare runs' compute-to-target");
    std::vector<std::string> cmp_runs;
    double cmp_target = 0.0;
    bool cmp_strict = false;
    std::string cmp_baseline, cmp_out;
    cmp->add_option("--runs", cmp_runs, "metrics CSV files")->required()->expected(-1);
    cmp->add_option("--target-loss", cmp_target, "eval loss to reach")->required();
    cmp->add_flag("--strict", cmp_strict, "exit 5 if any run never reaches the target");
    cmp->add_option("--baseline", cmp_baseline, "reference run name (default: slowest-to-target)");
    cmp->add_option("--out", cmp_out, "also write the report as CSV");

    // verify -----------------------------------------------------------------
    auto* ver = app.add_subcommand("verify", "run the seeded oracle suites");
    std::string ver_suite = "all";
    ver->add_option("--suite", ver_suite, "algebra|special-cases|gradients|all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(pre)) {
            FileConfig cfg = parse_config_file(pre_config);
            if (!cfg.has_model || !cfg.has_train)
                throw spec_error("pretrain config needs [model] and [train] sections");
            if (pre_seed) cfg.train.seed = *pre_seed;
            const VocabMode vmode = vocab_mode_from_name(pre_vocab);
            if (cfg.model.dtype == Dtype::f32)
                return do_pretrain<float>(cfg, pre_corpus, vmode, pre_out, cmdline);
            return do_pretrain<double>(cfg, pre_corpus, vmode, pre_out, cmdline);
        }

        if (app.got_subcommand(grw)) {
            FileConfig cfg = parse_config_file(grw_target);
            if (!cfg.has_model) throw spec_error("grow target config needs a [model] section");
            const Operator op = operator_from_name(grw_operator);
            const std::uint64_t seed = grw_seed ? *grw_seed : cfg.train.seed;
            const VocabMode vmode = vocab_mode_from_name(grw_vocab);
            LoadedCheckpoint ckpt = load_checkpoint(grw_from);
            if (ckpt.kind != "model")
                throw spec_error("grow expects a model checkpoint, got kind '" + ckpt.kind + "'");
            const LigoInitStrategy strategy = ligo_init_strategy_from_name(grw_init);
            if (ckpt.dtype == Dtype::f32)
                return do_grow<float>(std::move(ckpt), cfg, op, grw_ligo_steps, strategy,
                                      grw_corpus, vmode, seed, grw_out, cmdline, grw_from);
            return do_grow<double>(std::move(ckpt), cfg, op, grw_ligo_steps, strategy, grw_corpus,
                                   vmode, seed, grw_out, cmdline, grw_from);
        }

        if (app.got_subcommand(trn)) {
            FileConfig cfg = parse_config_file(trn_config);
            if (!cfg.has_train) throw spec_error("train config needs a [train] section");
            if (trn_seed) cfg.train.seed = *trn_seed;
            const VocabMode vmode = vocab_mode_from_name(trn_vocab);
            LoadedCheckpoint ckpt = load_checkpoint(trn_from);
            if (ckpt.kind != "model")
                throw spec_error("train expects a model checkpoint, got kind '" + ckpt.kind +
                                 "'");
            if (ckpt.dtype == Dtype::f32)
                return do_train<float>(std::move(ckpt), cfg, trn_corpus, vmode, trn_out, cmdline,
                                       trn_from);
            return do_train<double>(std::move(ckpt), cfg, trn_corpus, vmode, trn_out, cmdline,
                                    trn_from);
        }

        if (app.got_subcommand(cmp))
            return do_compare(cmp_runs, cmp_target, cmp_strict, cmp_baseline, cmp_out);

        if (app.got_subcommand(ver)) return do_verify(ver_suite);
    } catch (const spec_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const shape_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const size_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const divergence_error& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const io_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
