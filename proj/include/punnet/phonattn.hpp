#pragma once

// Pronunciation embeddings: attention pooling over trainable phoneme
// embeddings. Each phoneme id of a word is embedded, scored through a dense
// layer + context vector, and the word embedding is the weighted sum of its
// phoneme embeddings.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/phonodict.hpp"
#include "punnet/tensor.hpp"

namespace punnet {

// softmax(scores) is the default; RawRatio divides raw scores by their sum,
// kept for ablation against the normalized form.
enum class AlphaVariant { Softmax, RawRatio };

inline const char* to_string(AlphaVariant v) {
  return v == AlphaVariant::Softmax ? "softmax" : "raw-ratio";
}

template <typename T>
struct PhonemeAttention {
  Tensor<T> table;      // [|inventory|, d_P]
  Tensor<T> score_w;    // [d_P, d_A]
  Tensor<T> score_b;    // {d_A}
  Tensor<T> context;    // {d_A}
  AlphaVariant variant = AlphaVariant::Softmax;

  PhonemeAttention() = default;

  PhonemeAttention(std::size_t inventory_size, std::size_t d_p, std::size_t d_a, Rng& rng,
                   AlphaVariant variant_in = AlphaVariant::Softmax)
      : variant(variant_in) {
    if (d_p == 0 || d_a == 0) throw ArgumentError("phoneme attention: d_P and d_A must be > 0");
    table = init_uniform<T>({inventory_size, d_p}, 0.1, rng);
    score_w = glorot_uniform<T>(d_p, d_a, rng);
    score_b = Tensor<T>::zeros({d_a}, true);
    context = init_uniform<T>({d_a}, 0.1, rng);
  }

  std::size_t phoneme_dim() const { return table.cols(); }

  struct Result {
    Tensor<T> embedding;  // {d_P}
    Tensor<T> weights;    // {M}
  };

  Result embed(const Pronunciation& pron) const {
    if (pron.phoneme_ids.empty()) throw ArgumentError("pronunciation_embed: empty pronunciation");
    Tensor<T> u = gather_rows(table, pron.phoneme_ids);          // [M, d_P]
    Tensor<T> v = tanh(add_row(matmul(u, score_w), score_b));    // [M, d_A]
    Tensor<T> scores = matvec(v, context);                       // {M}
    Tensor<T> weights =
        variant == AlphaVariant::Softmax ? row_softmax(scores) : normalize_sum(scores);
    return {vecmat(weights, u), weights};
  }

  // One row per word.
  Tensor<T> embed_sentence(const std::vector<Pronunciation>& prons,
                           std::vector<Tensor<T>>* weights_out = nullptr) const {
    if (prons.empty()) throw ArgumentError("embed_sentence: empty sentence");
    std::vector<Tensor<T>> rows;
    rows.reserve(prons.size());
    for (const auto& p : prons) {
      Result r = embed(p);
      rows.push_back(r.embedding);
      if (weights_out) weights_out->push_back(r.weights);
    }
    return stack_rows(rows);
  }

  std::vector<std::pair<std::string, Tensor<T>>> parameters() const {
    return {{"phon.table", table},
            {"phon.score_w", score_w},
            {"phon.score_b", score_b},
            {"phon.context", context}};
  }
};

// Overwrite phoneme embedding rows from a text file of lines
// `SYMBOL v1 ... v_dP`. Symbols not listed keep their current rows.
template <typename T>
std::size_t load_phoneme_vectors(const std::string& path, const PhonemeInventory& inventory,
                                 Tensor<T>& table) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phoneme vector file: " + path);
  const std::size_t d_p = table.cols();
  std::size_t loaded = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string symbol;
    fields >> symbol;
    if (symbol.empty()) continue;
    const int id = inventory.id(symbol);
    if (id < 0) {
      throw FormatError("phoneme vector file line " + std::to_string(line_no) +
                        ": unknown symbol '" + symbol + "'");
    }
    std::vector<T> values;
    double v;
    while (fields >> v) values.push_back(static_cast<T>(v));
    if (values.size() != d_p) {
      throw FormatError("phoneme vector for '" + symbol + "' has " +
                        std::to_string(values.size()) + " values, expected " +
                        std::to_string(d_p));
    }
    std::copy(values.begin(), values.end(),
              table.mutable_value().begin() + static_cast<std::size_t>(id) * d_p);
    ++loaded;
  }
  return loaded;
}

}  // namespace punnet
