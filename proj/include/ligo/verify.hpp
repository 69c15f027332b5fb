#pragma once

#include <span>
#include <string>
#include <vector>

#include "ligo/ligo.hpp"
#include "ligo/model.hpp"

namespace ligo {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the named oracle suite ("algebra", "special-cases", "gradients" or
/// "all"). Self-contained and seeded; throws spec_error on unknown names.
std::vector<CheckResult> run_verify_suite(const std::string& suite);

std::string format_check_table(const std::vector<CheckResult>& results);

// --- reusable pieces (also driven by the test and acceptance suites) ------

std::vector<double> flatten_params(const ParamSet<double>& p);
ParamSet<double> unflatten_params(const ModelConfig& cfg, std::span<const double> x);
std::vector<double> flatten_ligo(const LigoParams<double>& p);
LigoParams<double> unflatten_ligo(const ModelConfig& source, const ModelConfig& target,
                                  std::span<const double> x);

/// max_i |analytic_i - numeric_i| / max(1e-12, max_i |numeric_i|).
double relative_grad_error(std::span<const double> analytic, std::span<const double> numeric);

/// Gradient of the model loss vs central finite differences on a seeded
/// random batch; returns the relative error.
double model_grad_check(const ModelConfig& cfg, int batch, int seq, std::uint64_t seed,
                        double eps = 1e-5);

/// Gradient of loss(forward(expand(small, p))) w.r.t. the operator
/// parameters vs central finite differences; returns the relative error.
double ligo_grad_check(const ModelConfig& source, const ModelConfig& target, int batch, int seq,
                       std::uint64_t seed, double eps = 1e-5);

/// Largest |difference| across all tensors of two equally-shaped sets.
double max_param_diff(const ParamSet<double>& a, const ParamSet<double>& b);

} // namespace ligo
