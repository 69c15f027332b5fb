#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ligo/ligo.hpp"
#include "ligo/model.hpp"

namespace ligo {

// Checkpoint container, version 1:
//   bytes 0..7    magic "LIGOCKPT"
//   bytes 8..11   u32 little-endian version (= 1)
//   bytes 12..19  u64 little-endian header length H
//   bytes 20..20+H  UTF-8 JSON header: kind, config(s), dtype, endianness,
//                   flops_spent, manifest path, tensor manifest entries of
//                   {name, shape, offset, nbytes} with offsets absolute from
//                   the start of the file
//   then raw row-major little-endian tensor payloads, in manifest order.
static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'L', 'I', 'G', 'O', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
    return nlohmann::json{{"layers", cfg.num_layers}, {"hidden", cfg.hidden},
                          {"heads", cfg.heads},       {"ffn_mult", cfg.ffn_mult},
                          {"vocab", cfg.vocab},       {"seq_len", cfg.seq_len},
                          {"dtype", dtype_name(cfg.dtype)}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.num_layers = j.at("layers").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.ffn_mult = j.at("ffn_mult").get<int>();
    cfg.vocab = j.at("vocab").get<int>();
    cfg.seq_len = j.at("seq_len").get<int>();
    cfg.dtype = dtype_from_name(j.at("dtype").get<std::string>());
    cfg.validate();
    return cfg;
}

namespace detail {

template <class T>
constexpr Dtype dtype_of() {
    if constexpr (std::is_same_v<T, float>)
        return Dtype::f32;
    else
        return Dtype::f64;
}

struct TensorRef {
    std::string name;
    int rows = 0;
    int cols = 0;
    const void* data = nullptr;
    std::size_t nbytes = 0;
};

template <class T>
void collect_model_tensors(const ParamSet<T>& p, std::vector<TensorRef>& out) {
    for (const ParamKey& key : param_keys(p.config)) {
        const Mat<T>& m = p.at(key);
        out.push_back({key.name(), m.rows(), m.cols(), m.data(), m.size() * sizeof(T)});
    }
}

inline void write_checkpoint_file(const std::filesystem::path& path, nlohmann::json header,
                                  const std::vector<TensorRef>& tensors) {
    // Offsets depend on the header length and vice versa; settle on a length
    // and pad the serialized header with trailing spaces (valid JSON
    // whitespace) once it fits.
    auto render = [&](std::size_t header_len) {
        nlohmann::json manifest = nlohmann::json::array();
        std::uint64_t offset = 20 + header_len;
        for (const TensorRef& t : tensors) {
            manifest.push_back({{"name", t.name},
                                {"shape", {t.rows, t.cols}},
                                {"offset", offset},
                                {"nbytes", t.nbytes}});
            offset += t.nbytes;
        }
        header["tensors"] = manifest;
        return header.dump();
    };
    std::size_t header_len = render(0).size() + 16;
    std::string text = render(header_len);
    while (text.size() > header_len) {
        header_len = text.size() + 16;
        text = render(header_len);
    }
    text.resize(header_len, ' ');

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open checkpoint for writing: " + path.string());
    f.write(kCheckpointMagic, 8);
    const std::uint32_t version = kCheckpointVersion;
    f.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t hlen = header_len;
    f.write(reinterpret_cast<const char*>(&hlen), 8);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const TensorRef& t : tensors)
        f.write(static_cast<const char*>(t.data), static_cast<std::streamsize>(t.nbytes));
    if (!f) throw io_error("short write while saving checkpoint: " + path.string());
}

} // namespace detail

template <class T>
void save_checkpoint(const std::filesystem::path& path, const ParamSet<T>& params,
                     std::uint64_t flops_spent = 0, const std::string& manifest_path = "") {
    nlohmann::json header{{"kind", "model"},
                          {"dtype", dtype_name(detail::dtype_of<T>())},
                          {"endianness", "little"},
                          {"config", model_config_to_json(params.config)},
                          {"flops_spent", flops_spent},
                          {"manifest", manifest_path}};
    std::vector<detail::TensorRef> tensors;
    detail::collect_model_tensors(params, tensors);
    detail::write_checkpoint_file(path, std::move(header), tensors);
}

template <class T>
void save_checkpoint(const std::filesystem::path& path, const LigoParams<T>& params,
                     std::uint64_t flops_spent = 0, const std::string& manifest_path = "") {
    nlohmann::json header{{"kind", "ligo"},
                          {"dtype", dtype_name(detail::dtype_of<T>())},
                          {"endianness", "little"},
                          {"source", model_config_to_json(params.source)},
                          {"target", model_config_to_json(params.target)},
                          {"flops_spent", flops_spent},
                          {"manifest", manifest_path}};
    std::vector<detail::TensorRef> tensors;
    auto& mutable_params = const_cast<LigoParams<T>&>(params);
    for (auto& [name, mat] : ligo_tensors(mutable_params))
        tensors.push_back({name, mat->rows(), mat->cols(), mat->data(),
                           mat->size() * sizeof(T)});
    detail::write_checkpoint_file(path, std::move(header), tensors);
}

struct LoadedCheckpoint {
    std::string kind; // "model" or "ligo"
    Dtype dtype = Dtype::f32;
    std::uint64_t flops_spent = 0;
    std::string manifest;
    std::variant<ParamSet<float>, ParamSet<double>, LigoParams<float>, LigoParams<double>>
        payload;

    template <class T>
    ParamSet<T>& model() {
        if (auto* p = std::get_if<ParamSet<T>>(&payload)) return *p;
        throw io_error("checkpoint does not hold a model of the requested precision");
    }
    template <class T>
    LigoParams<T>& ligo() {
        if (auto* p = std::get_if<LigoParams<T>>(&payload)) return *p;
        throw io_error("checkpoint does not hold operator params of the requested precision");
    }
};

namespace detail {

template <class T>
void read_tensor_payload(const std::string& bytes, const nlohmann::json& entry, Mat<T>& out,
                         int rows, int cols, const std::string& name) {
    const auto shape = entry.at("shape");
    if (shape.size() != 2 || shape[0].get<int>() != rows || shape[1].get<int>() != cols)
        throw io_error("checkpoint tensor " + name + " has manifest shape " +
                       shape.dump() + ", expected [" + std::to_string(rows) + "," +
                       std::to_string(cols) + "]");
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t nbytes = entry.at("nbytes").get<std::uint64_t>();
    const std::uint64_t expect = std::uint64_t(rows) * cols * sizeof(T);
    if (nbytes != expect)
        throw io_error("checkpoint tensor " + name + " has " + std::to_string(nbytes) +
                       " bytes, expected " + std::to_string(expect));
    if (offset + nbytes > bytes.size())
        throw io_error("checkpoint truncated: tensor " + name + " extends past end of file");
    out = Mat<T>(rows, cols);
    std::memcpy(out.data(), bytes.data() + offset, nbytes);
}

template <class T>
ParamSet<T> load_model_payload(const std::string& bytes, const nlohmann::json& header) {
    const ModelConfig cfg = model_config_from_json(header.at("config"));
    ParamSet<T> p = zeros_like_config<T>(cfg);
    const auto& manifest = header.at("tensors");
    std::size_t i = 0;
    for (const ParamKey& key : param_keys(cfg)) {
        if (i >= manifest.size()) throw io_error("checkpoint manifest is missing tensors");
        const auto& entry = manifest[i++];
        if (entry.at("name").get<std::string>() != key.name())
            throw io_error("checkpoint manifest names " +
                           entry.at("name").get<std::string>() + " where " + key.name() +
                           " was expected");
        auto [r, c] = shape_of(cfg, key);
        read_tensor_payload(bytes, entry, p.at(key), r, c, key.name());
    }
    if (i != manifest.size()) throw io_error("checkpoint manifest has extra tensors");
    return p;
}

template <class T>
LigoParams<T> load_ligo_payload(const std::string& bytes, const nlohmann::json& header) {
    const ModelConfig source = model_config_from_json(header.at("source"));
    const ModelConfig target = model_config_from_json(header.at("target"));
    LigoParams<T> p = zeros_ligo<T>(source, target);
    const auto& manifest = header.at("tensors");
    std::size_t i = 0;
    for (auto& [name, mat] : ligo_tensors(p)) {
        if (i >= manifest.size()) throw io_error("checkpoint manifest is missing tensors");
        const auto& entry = manifest[i++];
        if (entry.at("name").get<std::string>() != name)
            throw io_error("checkpoint manifest names " +
                           entry.at("name").get<std::string>() + " where " + name +
                           " was expected");
        read_tensor_payload(bytes, entry, *mat, mat->rows(), mat->cols(), name);
    }
    if (i != manifest.size()) throw io_error("checkpoint manifest has extra tensors");
    return p;
}

} // namespace detail

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open checkpoint: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (bytes.size() < 20) throw io_error("checkpoint truncated: no container header");
    if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
        throw io_error("not a checkpoint container (bad magic): " + path.string());
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 8, 4);
    if (version != kCheckpointVersion)
        throw io_error("unsupported checkpoint version " + std::to_string(version));
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 12, 8);
    if (20 + header_len > bytes.size())
        throw io_error("checkpoint truncated: header extends past end of file");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(20, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("corrupt checkpoint header: ") + e.what());
    }

    LoadedCheckpoint out;
    try {
        out.kind = header.at("kind").get<std::string>();
        out.dtype = dtype_from_name(header.at("dtype").get<std::string>());
        out.flops_spent = header.value("flops_spent", std::uint64_t{0});
        out.manifest = header.value("manifest", std::string{});
        if (header.value("endianness", "little") != "little")
            throw io_error("checkpoint written with unsupported endianness");

        if (out.kind == "model") {
            if (out.dtype == Dtype::f32)
                out.payload = detail::load_model_payload<float>(bytes, header);
            else
                out.payload = detail::load_model_payload<double>(bytes, header);
        } else if (out.kind == "ligo") {
            if (out.dtype == Dtype::f32)
                out.payload = detail::load_ligo_payload<float>(bytes, header);
            else
                out.payload = detail::load_ligo_payload<double>(bytes, header);
        } else {
            throw io_error("unknown checkpoint kind '" + out.kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("corrupt checkpoint header: ") + e.what());
    }
    return out;
}

} // namespace ligo
