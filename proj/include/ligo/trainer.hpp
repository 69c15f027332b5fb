#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ligo/corpus.hpp"
#include "ligo/model.hpp"

namespace ligo {

enum class OptimizerKind { sgd, adaptive_moment };

inline OptimizerKind optimizer_from_name(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam" || s == "adaptive_moment") return OptimizerKind::adaptive_moment;
    throw spec_error("unknown optimizer '" + s + "' (expected sgd or adam)");
}

inline const char* optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

struct TrainConfig {
    int steps = 1;
    int batch_size = 8;
    int seq_len = 32;
    OptimizerKind optimizer = OptimizerKind::adaptive_moment;
    double lr = 1e-3;
    int warmup_steps = 0;
    int eval_every = 100;
    int eval_batches = 2;
    std::uint64_t seed = 0;
    Dtype dtype = Dtype::f32;
    bool deterministic = true; // zeroes wall_s so logs are byte-reproducible

    void validate() const {
        if (steps < 1) throw spec_error("train config: steps must be >= 1");
        if (!(lr > 0)) throw spec_error("train config: lr must be > 0");
        if (eval_every < 1) throw spec_error("train config: eval_every must be >= 1");
        if (batch_size < 1 || seq_len < 1 || eval_batches < 1 || warmup_steps < 0)
            throw spec_error("train config: invalid counts");
    }
};

/// One row of the training log.
struct MetricsRecord {
    std::int64_t step = 0;
    std::uint64_t tokens_seen = 0;
    std::uint64_t flops_cum = 0;
    double wall_s = 0.0;
    double train_loss = 0.0;
    std::optional<double> eval_loss;
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRecord& rec);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Training loop for both small and grown models. Emits one record per step
/// (plus a step-0 record with the initial eval), charges
/// flops_per_step(model, batch, seq) per optimizer step on top of
/// flops_carry, and aborts with a divergence_error on a non-finite loss.
/// Fully deterministic given the seed.
template <class T>
ParamSet<T> train(ParamSet<T> params, const Corpus& corpus, const TrainConfig& cfg,
                  std::uint64_t flops_carry, std::vector<MetricsRecord>& metrics,
                  const MetricsSink& sink = {}) {
    cfg.validate();
    params.config.validate();
    if (corpus.vocab_size() > params.config.vocab)
        throw spec_error("corpus vocabulary (" + std::to_string(corpus.vocab_size()) +
                         ") exceeds model vocab (" + std::to_string(params.config.vocab) + ")");
    if (cfg.seq_len > params.config.seq_len)
        throw spec_error("train seq_len exceeds the model's positional table");

    const RngState root(cfg.seed);
    BatchSampler sampler(corpus, cfg.batch_size, cfg.seq_len, root.fork("data"));
    BatchSampler probe(corpus, cfg.batch_size, cfg.seq_len, root.fork("probe"));
    const std::vector<Batch> eval_set =
        fixed_eval_batches(corpus, cfg.batch_size, cfg.seq_len, cfg.eval_batches);

    const std::uint64_t step_flops = flops_per_step(params.config, cfg.batch_size, cfg.seq_len);
    const auto t0 = std::chrono::steady_clock::now();
    auto wall = [&]() {
        if (cfg.deterministic) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    auto emit = [&](MetricsRecord rec) {
        metrics.push_back(rec);
        if (sink) sink(rec);
    };

    emit({0, 0, flops_carry, wall(), loss(params, probe.next()), evaluate(params, eval_set)});

    // adaptive-moment state, keyed in canonical tensor order
    std::vector<Mat<T>> m1, m2;
    if (cfg.optimizer == OptimizerKind::adaptive_moment)
        for (const ParamKey& key : param_keys(params.config)) {
            const Mat<T>& t = params.at(key);
            m1.emplace_back(t.rows(), t.cols());
            m2.emplace_back(t.rows(), t.cols());
        }
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    for (int step = 1; step <= cfg.steps; ++step) {
        const Batch batch = sampler.next();
        auto [train_loss, g] = grad(params, batch);
        if (!std::isfinite(train_loss)) {
            MetricsRecord diag{step,
                               std::uint64_t(step) * cfg.batch_size * cfg.seq_len,
                               flops_carry + std::uint64_t(step) * step_flops,
                               wall(),
                               train_loss,
                               std::nullopt};
            if (sink) sink(diag);
            throw divergence_error("training diverged: non-finite loss at step " +
                                   std::to_string(step));
        }

        const double lr_t =
            cfg.warmup_steps > 0
                ? cfg.lr * std::min(1.0, double(step) / double(cfg.warmup_steps))
                : cfg.lr;

        std::size_t ti = 0;
        for (const ParamKey& key : param_keys(params.config)) {
            Mat<T>& theta = params.at(key);
            const Mat<T>& gi = g.at(key);
            if (cfg.optimizer == OptimizerKind::sgd) {
                for (std::size_t i = 0; i < theta.size(); ++i)
                    theta.values()[i] -= static_cast<T>(lr_t * double(gi.values()[i]));
            } else {
                Mat<T>& m = m1[ti];
                Mat<T>& v = m2[ti];
                const double bc1 = 1.0 - std::pow(beta1, step);
                const double bc2 = 1.0 - std::pow(beta2, step);
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    const double gv = double(gi.values()[i]);
                    m.values()[i] =
                        static_cast<T>(beta1 * double(m.values()[i]) + (1.0 - beta1) * gv);
                    v.values()[i] =
                        static_cast<T>(beta2 * double(v.values()[i]) + (1.0 - beta2) * gv * gv);
                    theta.values()[i] -= static_cast<T>(
                        lr_t * (double(m.values()[i]) / bc1) /
                        (std::sqrt(double(v.values()[i]) / bc2) + adam_eps));
                }
            }
            ++ti;
        }

        MetricsRecord rec{step,
                          std::uint64_t(step) * cfg.batch_size * cfg.seq_len,
                          flops_carry + std::uint64_t(step) * step_flops,
                          wall(),
                          train_loss,
                          std::nullopt};
        if (step % cfg.eval_every == 0 || step == cfg.steps)
            rec.eval_loss = evaluate(params, eval_set);
        emit(rec);
    }
    return params;
}

// ---------------------------------------------------------------------------
// Run comparison: FLOPs / wall time to first reach a target eval loss.
// ---------------------------------------------------------------------------

struct RunCurve {
    std::string name;
    std::vector<MetricsRecord> records;
};

struct RunComparison {
    std::string name;
    bool reached = false;
    std::uint64_t flops_to_target = 0;
    double wall_to_target = 0.0;
    double savings_pct = 0.0; // vs the reference run; 0 for the reference itself
    bool is_reference = false;
};

struct CompareReport {
    double target_loss = 0.0;
    std::string reference;
    bool all_reached = false;
    std::vector<RunComparison> rows;
};

/// First-crossing comparison. The reference run is `reference_name` when
/// given, otherwise the reached run with the largest FLOPs-to-target (ties
/// broken by name), which keeps the report invariant under input
/// permutation. Runs that never reach the target are flagged, never
/// extrapolated.
CompareReport compare_runs(const std::vector<RunCurve>& runs, double target_loss,
                           const std::string& reference_name = "");

std::string format_compare_report(const CompareReport& report);
void write_compare_csv(std::ostream& os, const CompareReport& report);

} // namespace ligo
