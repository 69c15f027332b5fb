// Python bindings for the growth-operator library: dense kernels, the char
// LM, the growth operators and checkpoint I/O. Everything is exposed in
// 64-bit precision.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ligo/checkpoint.hpp"
#include "ligo/corpus.hpp"
#include "ligo/ligo.hpp"
#include "ligo/manifest.hpp"
#include "ligo/trainer.hpp"
#include "ligo/verify.hpp"

namespace py = pybind11;
using namespace ligo;

namespace {

MatD mat_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw shape_error("expected a 2-d array");
    MatD m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(m.data(), a.data(), m.size() * sizeof(double));
    return m;
}

py::array_t<double> array_from_mat(const MatD& m) {
    py::array_t<double> a({m.rows(), m.cols()});
    std::memcpy(a.mutable_data(), m.data(), m.size() * sizeof(double));
    return a;
}

struct PyModel {
    ParamSet<double> params;

    std::vector<std::string> tensor_names() const {
        std::vector<std::string> names;
        for (const ParamKey& key : param_keys(params.config)) names.push_back(key.name());
        return names;
    }

    py::array_t<double> tensor(const std::string& name) const {
        for (const ParamKey& key : param_keys(params.config))
            if (key.name() == name) return array_from_mat(params.at(key));
        throw shape_error("no tensor named " + name);
    }
};

Batch batch_from_lists(const std::vector<std::int32_t>& tokens,
                       const std::vector<std::int32_t>& targets, int batch, int seq) {
    Batch b;
    b.batch = batch;
    b.seq = seq;
    b.tokens = tokens;
    b.targets = targets;
    return b;
}

} // namespace

PYBIND11_MODULE(pyligo, m) {
    m.doc() = "learned growth operators for small transformers";
    m.attr("__version__") = kToolVersion;

    py::register_exception<spec_error>(m, "SpecError");
    py::register_exception<shape_error>(m, "ShapeError");
    py::register_exception<data_error>(m, "DataError");

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init([](int layers, int hidden, int heads, int ffn_mult, int vocab, int seq_len) {
                 ModelConfig cfg{layers, hidden, heads, ffn_mult, vocab, seq_len, Dtype::f64};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("layers"), py::arg("hidden"), py::arg("heads"), py::arg("ffn_mult"),
             py::arg("vocab"), py::arg("seq_len"))
        .def_readonly("layers", &ModelConfig::num_layers)
        .def_readonly("hidden", &ModelConfig::hidden)
        .def_readonly("heads", &ModelConfig::heads)
        .def_readonly("ffn_mult", &ModelConfig::ffn_mult)
        .def_readonly("vocab", &ModelConfig::vocab)
        .def_readonly("seq_len", &ModelConfig::seq_len);

    m.def("param_count", &param_count);
    m.def("flops_per_step", &flops_per_step);
    m.def("ligo_param_count", &ligo_param_count);

    // dense kernels
    m.def("vec", [](const py::array_t<double>& w) { return array_from_mat(vec(mat_from_array(w))); });
    m.def("kron", [](const py::array_t<double>& a, const py::array_t<double>& b) {
        return array_from_mat(kron(mat_from_array(a), mat_from_array(b)));
    });
    m.def("kron_apply",
          [](const py::array_t<double>& a, const py::array_t<double>& b,
             const py::array_t<double>& w) {
              return array_from_mat(kron_apply(mat_from_array(a), mat_from_array(b),
                                               mat_from_array(w)));
          });

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("config", [](const PyModel& mdl) { return mdl.params.config; })
        .def("tensor_names", &PyModel::tensor_names)
        .def("tensor", &PyModel::tensor)
        .def("forward",
             [](const PyModel& mdl, const std::vector<std::int32_t>& tokens, int batch, int seq) {
                 return array_from_mat(forward(mdl.params, tokens, batch, seq));
             })
        .def("loss", [](const PyModel& mdl, const std::vector<std::int32_t>& tokens,
                        const std::vector<std::int32_t>& targets, int batch, int seq) {
            return loss(mdl.params, batch_from_lists(tokens, targets, batch, seq));
        })
        .def("save", [](const PyModel& mdl, const std::string& path) {
            save_checkpoint(path, mdl.params);
        });

    m.def("init_random", [](const ModelConfig& cfg, std::uint64_t seed) {
        return PyModel{init_random<double>(cfg, RngState(seed))};
    });

    m.def("load_model", [](const std::string& path) {
        auto loaded = load_checkpoint(path);
        if (loaded.kind != "model") throw data_error("checkpoint does not hold a model");
        if (loaded.dtype == Dtype::f64) return PyModel{std::move(loaded.model<double>())};
        // widen f32 payloads for the f64-only binding
        const ParamSet<float>& p32 = loaded.model<float>();
        ModelConfig cfg = p32.config;
        cfg.dtype = Dtype::f64;
        ParamSet<double> p = zeros_like_config<double>(cfg);
        for (const ParamKey& key : param_keys(cfg)) {
            const MatF& src = p32.at(key);
            MatD& dst = p.at(key);
            for (std::size_t i = 0; i < src.size(); ++i)
                dst.values()[i] = double(src.values()[i]);
        }
        return PyModel{std::move(p)};
    });

    m.def(
        "grow",
        [](const PyModel& mdl, const ModelConfig& target, const std::string& op,
           std::uint64_t seed) {
            GrowthSpec spec{mdl.params.config, target, operator_from_name(op), seed, {}};
            return PyModel{grow(mdl.params, spec)};
        },
        py::arg("model"), py::arg("target"), py::arg("operator"), py::arg("seed") = 0);

    m.def(
        "ligo_grow",
        [](const PyModel& mdl, const ModelConfig& target, const std::string& corpus_spec,
           int steps, std::uint64_t seed, int batch, int seq) {
            auto p = ligo_init<double>(LigoInitStrategy::stack_net2net, mdl.params.config,
                                       target, RngState(seed));
            if (steps > 0) {
                const Corpus corpus = load_corpus(corpus_spec, VocabMode::char_level);
                BatchSampler sampler(corpus, batch, seq, RngState(seed).fork("ligo_data"));
                p = ligo_learn(mdl.params, std::move(p), [&]() { return sampler.next(); },
                               steps);
            }
            return PyModel{ligo_expand(mdl.params, p)};
        },
        py::arg("model"), py::arg("target"), py::arg("corpus") = "synthetic:seed=42,bytes=200000",
        py::arg("steps") = 100, py::arg("seed") = 0, py::arg("batch") = 8, py::arg("seq") = 16);

    m.def("generate_markov_text", &generate_markov_text);

    m.def("verify_suite", [](const std::string& suite) {
        std::vector<std::tuple<std::string, std::string, bool>> out;
        for (const CheckResult& r : run_verify_suite(suite))
            out.emplace_back(r.suite, r.name, r.passed);
        return out;
    });
}
