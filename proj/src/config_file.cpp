#include "ligo/config_file.hpp"

#include <fstream>
#include <sstream>

namespace ligo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw spec_error(where + ": expected an integer, got '" + v + "'");
    }
}

double to_double(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw spec_error(where + ": expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw spec_error(where + ": expected true/false, got '" + v + "'");
}

} // namespace

FileConfig parse_config_text(const std::string& text, const std::string& origin) {
    FileConfig out;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw spec_error(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "model")
                out.has_model = true;
            else if (section == "train")
                out.has_train = true;
            else if (section != "grow")
                throw spec_error(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw spec_error(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw spec_error(where + ": key outside any section");

        if (section == "model") {
            if (key == "layers")
                out.model.num_layers = to_int(value, where);
            else if (key == "hidden")
                out.model.hidden = to_int(value, where);
            else if (key == "heads")
                out.model.heads = to_int(value, where);
            else if (key == "ffn_mult")
                out.model.ffn_mult = to_int(value, where);
            else if (key == "vocab")
                out.model.vocab = to_int(value, where);
            else if (key == "seq_len")
                out.model.seq_len = to_int(value, where);
            else if (key == "dtype")
                out.model.dtype = dtype_from_name(value);
            else
                throw spec_error(where + ": unknown model key '" + key + "'");
        } else if (section == "train") {
            if (key == "steps")
                out.train.steps = to_int(value, where);
            else if (key == "batch_size")
                out.train.batch_size = to_int(value, where);
            else if (key == "seq_len")
                out.train.seq_len = to_int(value, where);
            else if (key == "optimizer")
                out.train.optimizer = optimizer_from_name(value);
            else if (key == "lr")
                out.train.lr = to_double(value, where);
            else if (key == "warmup_steps")
                out.train.warmup_steps = to_int(value, where);
            else if (key == "eval_every")
                out.train.eval_every = to_int(value, where);
            else if (key == "eval_batches")
                out.train.eval_batches = to_int(value, where);
            else if (key == "seed")
                out.train.seed = static_cast<std::uint64_t>(std::stoull(value));
            else if (key == "deterministic")
                out.train.deterministic = to_bool(value, where);
            else
                throw spec_error(where + ": unknown train key '" + key + "'");
        } else { // grow
            if (key != "ligo_lr" && key != "ligo_noise")
                throw spec_error(where + ": unknown grow key '" + key + "'");
            out.grow[key] = value;
        }
    }
    if (out.has_model) out.model.validate();
    if (out.has_train) out.train.validate();
    return out;
}

FileConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw spec_error("cannot read config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config_text(text, path.string());
}

} // namespace ligo
