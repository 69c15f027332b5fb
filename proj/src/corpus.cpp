#include "ligo/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace ligo {

std::vector<std::int32_t> Corpus::tokenize(std::string_view text) const {
    std::vector<std::int32_t> out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        const std::int32_t id = byte_to_id[c];
        if (id < 0)
            throw data_error("tokenize: byte " + std::to_string(int(c)) +
                             " is not in the corpus vocabulary");
        out.push_back(id);
    }
    return out;
}

std::string Corpus::detokenize(std::span<const std::int32_t> ids) const {
    std::string out;
    out.reserve(ids.size());
    for (std::int32_t id : ids) {
        if (id < 0 || id >= vocab_size())
            throw data_error("detokenize: id " + std::to_string(id) + " out of range");
        out.push_back(static_cast<char>(id_to_byte[id]));
    }
    return out;
}

std::string generate_markov_text(std::uint64_t seed, std::size_t bytes) {
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz \n";
    const int n = static_cast<int>(alphabet.size());
    constexpr int successors = 4;
    static constexpr double weights[successors] = {0.5, 0.25, 0.15, 0.1};

    // per (prev2, prev1) context: a few allowed successors with fixed odds
    RngState table_rng = RngState(seed).fork("markov_table");
    std::vector<std::array<int, successors>> table(static_cast<std::size_t>(n) * n);
    for (auto& row : table)
        for (int& s : row) s = static_cast<int>(table_rng.below(static_cast<std::uint32_t>(n)));

    RngState sample_rng = RngState(seed).fork("markov_sample");
    std::string text;
    text.reserve(bytes);
    int prev2 = 0, prev1 = 1;
    for (std::size_t i = 0; i < bytes; ++i) {
        const auto& row = table[static_cast<std::size_t>(prev2) * n + prev1];
        const double u = sample_rng.uniform();
        double acc = 0.0;
        int pick = row[successors - 1];
        for (int s = 0; s < successors; ++s) {
            acc += weights[s];
            if (u < acc) {
                pick = row[s];
                break;
            }
        }
        text.push_back(alphabet[static_cast<std::size_t>(pick)]);
        prev2 = prev1;
        prev1 = pick;
    }
    return text;
}

Corpus corpus_from_text(std::string_view text, VocabMode mode) {
    if (text.empty()) throw data_error("corpus is empty");
    Corpus c;
    c.byte_to_id.fill(-1);
    if (mode == VocabMode::byte_level) {
        c.id_to_byte.resize(256);
        for (int b = 0; b < 256; ++b) {
            c.id_to_byte[b] = static_cast<std::uint8_t>(b);
            c.byte_to_id[b] = b;
        }
    } else {
        std::set<std::uint8_t> seen(text.begin(), text.end());
        for (std::uint8_t b : seen) {
            c.byte_to_id[b] = static_cast<std::int32_t>(c.id_to_byte.size());
            c.id_to_byte.push_back(b);
        }
    }
    c.tokens = c.tokenize(text);
    c.train_end = (c.tokens.size() * 9) / 10;
    if (c.train_end == 0 || c.train_end >= c.tokens.size())
        throw data_error("corpus too small to split into train and eval parts");
    return c;
}

Corpus load_corpus(const std::string& source, VocabMode mode) {
    constexpr std::string_view synth_prefix = "synthetic:";
    if (source.rfind(synth_prefix, 0) == 0) {
        std::uint64_t seed = 42;
        std::size_t bytes = 1 << 20;
        std::string args = source.substr(synth_prefix.size());
        std::size_t at = 0;
        while (at < args.size()) {
            std::size_t end = args.find(',', at);
            if (end == std::string::npos) end = args.size();
            const std::string kv = args.substr(at, end - at);
            at = end + 1;
            if (kv.empty()) continue;
            const std::size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw data_error("synthetic corpus spec: expected key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
            try {
                if (key == "seed")
                    seed = std::stoull(value);
                else if (key == "bytes")
                    bytes = std::stoull(value);
                else
                    throw data_error("synthetic corpus spec: unknown key '" + key + "'");
            } catch (const std::logic_error&) {
                throw data_error("synthetic corpus spec: bad value for '" + key + "'");
            }
        }
        return corpus_from_text(generate_markov_text(seed, bytes), mode);
    }

    std::ifstream f(source, std::ios::binary);
    if (!f) throw data_error("cannot read corpus file: " + source);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return corpus_from_text(text, mode);
}

BatchSampler::BatchSampler(const Corpus& corpus, int batch_size, int seq, RngState rng)
    : corpus_(&corpus), batch_size_(batch_size), seq_(seq), rng_(rng) {
    if (batch_size < 1 || seq < 1) throw spec_error("batch sampler: batch and seq must be >= 1");
    if (corpus.train_end < static_cast<std::size_t>(seq) + 1)
        throw data_error("corpus train split too small for sequence length " +
                         std::to_string(seq));
}

Batch BatchSampler::next() {
    Batch b;
    b.batch = batch_size_;
    b.seq = seq_;
    b.tokens.resize(static_cast<std::size_t>(batch_size_) * seq_);
    b.targets.resize(b.tokens.size());
    const std::uint32_t span =
        static_cast<std::uint32_t>(corpus_->train_end - static_cast<std::size_t>(seq_));
    for (int i = 0; i < batch_size_; ++i) {
        const std::size_t start = rng_.below(span);
        for (int t = 0; t < seq_; ++t) {
            b.tokens[static_cast<std::size_t>(i) * seq_ + t] = corpus_->tokens[start + t];
            b.targets[static_cast<std::size_t>(i) * seq_ + t] = corpus_->tokens[start + t + 1];
        }
    }
    return b;
}

std::vector<Batch> fixed_eval_batches(const Corpus& corpus, int batch_size, int seq,
                                      int num_batches) {
    if (batch_size < 1 || seq < 1 || num_batches < 1)
        throw spec_error("eval batches: all counts must be >= 1");
    const std::size_t eval_len = corpus.tokens.size() - corpus.train_end;
    if (eval_len < static_cast<std::size_t>(seq) + 1)
        throw data_error("corpus eval split too small for sequence length " +
                         std::to_string(seq));
    const std::size_t last_start = corpus.tokens.size() - seq - 1;
    const int total = batch_size * num_batches;
    std::vector<Batch> batches;
    for (int bi = 0; bi < num_batches; ++bi) {
        Batch b;
        b.batch = batch_size;
        b.seq = seq;
        b.tokens.resize(static_cast<std::size_t>(batch_size) * seq);
        b.targets.resize(b.tokens.size());
        for (int i = 0; i < batch_size; ++i) {
            const int w = bi * batch_size + i;
            const std::size_t start =
                total == 1 ? corpus.train_end
                           : corpus.train_end +
                                 (last_start - corpus.train_end) * static_cast<std::size_t>(w) /
                                     static_cast<std::size_t>(total - 1);
            for (int t = 0; t < seq; ++t) {
                b.tokens[static_cast<std::size_t>(i) * seq + t] = corpus.tokens[start + t];
                b.targets[static_cast<std::size_t>(i) * seq + t] = corpus.tokens[start + t + 1];
            }
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

} // namespace ligo
