#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ligo/model.hpp"
#include "ligo/rng.hpp"

namespace ligo {

enum class VocabMode { char_level, byte_level };

inline VocabMode vocab_mode_from_name(const std::string& s) {
    if (s == "char") return VocabMode::char_level;
    if (s == "byte") return VocabMode::byte_level;
    throw spec_error("unknown vocab mode '" + s + "' (expected char or byte)");
}

/// Tokenized text with a fixed 0.9 / 0.1 train/eval split. char mode maps
/// the distinct bytes observed in the corpus (sorted) to dense ids; byte
/// mode is the identity map over all 256 byte values.
struct Corpus {
    std::vector<std::int32_t> tokens;
    std::vector<std::uint8_t> id_to_byte;
    std::array<std::int32_t, 256> byte_to_id{}; // -1 where absent
    std::size_t train_end = 0;                  // first eval token index

    int vocab_size() const { return static_cast<int>(id_to_byte.size()); }

    std::vector<std::int32_t> tokenize(std::string_view text) const;
    std::string detokenize(std::span<const std::int32_t> ids) const;
};

/// Order-2 Markov chain over a small letter alphabet; fully determined by
/// the seed. Serves as the reproducible stand-in corpus.
std::string generate_markov_text(std::uint64_t seed, std::size_t bytes);

Corpus corpus_from_text(std::string_view text, VocabMode mode);

/// `source` is either a readable file path or a synthetic spec of the form
/// "synthetic:seed=42,bytes=1048576" (both keys optional).
Corpus load_corpus(const std::string& source, VocabMode mode);

/// Seeded random training windows.
class BatchSampler {
  public:
    BatchSampler(const Corpus& corpus, int batch_size, int seq, RngState rng);
    Batch next();

  private:
    const Corpus* corpus_;
    int batch_size_;
    int seq_;
    RngState rng_;
};

/// Deterministic, evenly spaced windows over the eval split. Identical
/// across runs for a given corpus and geometry.
std::vector<Batch> fixed_eval_batches(const Corpus& corpus, int batch_size, int seq,
                                      int num_batches);

template <class T>
double evaluate(const ParamSet<T>& params, const std::vector<Batch>& batches) {
    if (batches.empty()) throw data_error("evaluate: no eval batches");
    double total = 0.0;
    for (const Batch& b : batches) total += loss(params, b);
    return total / double(batches.size());
}

} // namespace ligo
