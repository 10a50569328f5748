#pragma once

// Contextualized word embeddings behind one contract: a [CLS] sentence
// vector plus one row per token. Two implementations:
//   - ToyTransformer: a small trainable transformer encoder.
//   - PrecomputedEncoder: verbatim matrices loaded from a PCEMB1 file,
//     standing in for a frozen large pretrained encoder.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/tensor.hpp"
#include "punnet/vocab.hpp"

namespace punnet {

template <typename T>
struct ContextualEncoding {
  Tensor<T> cls;     // {d_C}
  Tensor<T> tokens;  // [N, d_C]
};

struct ToyTransformerConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t d_model = 64;   // d_C
  std::size_t ffn_dim = 0;    // 0 -> 4 * d_model
  std::size_t max_len = 128;  // counts the [CLS] slot
  std::size_t vocab_size = 0;

  std::size_t resolved_ffn() const { return ffn_dim == 0 ? 4 * d_model : ffn_dim; }

  void validate() const {
    if (d_model == 0 || heads == 0 || d_model % heads != 0) {
      throw ArgumentError("toy transformer: d_model (" + std::to_string(d_model) +
                          ") must be a positive multiple of heads (" + std::to_string(heads) +
                          ")");
    }
    if (layers == 0) throw ArgumentError("toy transformer: needs at least one layer");
    if (max_len < 2) throw ArgumentError("toy transformer: max_len must be >= 2");
    if (vocab_size == 0) throw ArgumentError("toy transformer: vocab_size not set");
  }
};

template <typename T>
class ToyTransformer {
 public:
  ToyTransformer() = default;

  ToyTransformer(ToyTransformerConfig config, Rng& rng) : config_(config) {
    config_.validate();
    const std::size_t d = config_.d_model;
    const std::size_t f = config_.resolved_ffn();
    // Token table has one extra row for [CLS]. Embedding rows feed straight
    // into layer norm, so they are initialized wide enough to keep the row
    // variance well above the norm epsilon.
    token_table_ = init_uniform<T>({config_.vocab_size + 1, d}, 0.5, rng);
    position_table_ = init_uniform<T>({config_.max_len, d}, 0.5, rng);
    layers_.resize(config_.layers);
    for (auto& layer : layers_) {
      layer.wq = glorot_uniform<T>(d, d, rng);
      layer.bq = Tensor<T>::zeros({d}, true);
      layer.wk = glorot_uniform<T>(d, d, rng);
      layer.bk = Tensor<T>::zeros({d}, true);
      layer.wv = glorot_uniform<T>(d, d, rng);
      layer.bv = Tensor<T>::zeros({d}, true);
      layer.wo = glorot_uniform<T>(d, d, rng);
      layer.bo = Tensor<T>::zeros({d}, true);
      layer.ln1_gain = Tensor<T>::from({d}, std::vector<T>(d, T(1)), true);
      layer.ln1_bias = Tensor<T>::zeros({d}, true);
      layer.w1 = glorot_uniform<T>(d, f, rng);
      layer.b1 = Tensor<T>::zeros({f}, true);
      layer.w2 = glorot_uniform<T>(f, d, rng);
      layer.b2 = Tensor<T>::zeros({d}, true);
      layer.ln2_gain = Tensor<T>::from({d}, std::vector<T>(d, T(1)), true);
      layer.ln2_bias = Tensor<T>::zeros({d}, true);
    }
  }

  const ToyTransformerConfig& config() const { return config_; }
  int cls_token_id() const { return static_cast<int>(config_.vocab_size); }

  // attn_out, when given, collects every layer/head attention matrix.
  ContextualEncoding<T> encode(const std::vector<int>& token_ids,
                               std::vector<Tensor<T>>* attn_out = nullptr) const {
    if (token_ids.empty()) throw ArgumentError("encode: empty token list");
    const std::size_t n = token_ids.size();
    if (n + 1 > config_.max_len) {
      throw ArgumentError("sentence of " + std::to_string(n) + " tokens exceeds max_len " +
                          std::to_string(config_.max_len));
    }
    std::vector<int> ids;
    ids.reserve(n + 1);
    ids.push_back(cls_token_id());
    ids.insert(ids.end(), token_ids.begin(), token_ids.end());
    std::vector<int> positions(n + 1);
    for (std::size_t i = 0; i <= n; ++i) positions[i] = static_cast<int>(i);

    Tensor<T> x = add(gather_rows(token_table_, ids), gather_rows(position_table_, positions));
    for (const auto& layer : layers_) {
      x = layer_norm(add(x, self_attention(layer, x, attn_out)), layer.ln1_gain, layer.ln1_bias);
      x = layer_norm(add(x, feed_forward(layer, x)), layer.ln2_gain, layer.ln2_bias);
    }
    return {row(x, 0), slice_rows(x, 1, n + 1)};
  }

  std::vector<std::pair<std::string, Tensor<T>>> parameters() const {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    out.emplace_back("encoder.token_table", token_table_);
    out.emplace_back("encoder.position_table", position_table_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      const std::string p = "encoder.layer" + std::to_string(i) + ".";
      out.emplace_back(p + "wq", l.wq);
      out.emplace_back(p + "bq", l.bq);
      out.emplace_back(p + "wk", l.wk);
      out.emplace_back(p + "bk", l.bk);
      out.emplace_back(p + "wv", l.wv);
      out.emplace_back(p + "bv", l.bv);
      out.emplace_back(p + "wo", l.wo);
      out.emplace_back(p + "bo", l.bo);
      out.emplace_back(p + "ln1_gain", l.ln1_gain);
      out.emplace_back(p + "ln1_bias", l.ln1_bias);
      out.emplace_back(p + "w1", l.w1);
      out.emplace_back(p + "b1", l.b1);
      out.emplace_back(p + "w2", l.w2);
      out.emplace_back(p + "b2", l.b2);
      out.emplace_back(p + "ln2_gain", l.ln2_gain);
      out.emplace_back(p + "ln2_bias", l.ln2_bias);
    }
    return out;
  }

 private:
  struct Layer {
    Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor<T> ln1_gain, ln1_bias;
    Tensor<T> w1, b1, w2, b2;
    Tensor<T> ln2_gain, ln2_bias;
  };

  Tensor<T> self_attention(const Layer& layer, const Tensor<T>& x,
                           std::vector<Tensor<T>>* attn_out) const {
    const std::size_t d = config_.d_model;
    const std::size_t h = config_.heads;
    const std::size_t dh = d / h;
    Tensor<T> q = add_row(matmul(x, layer.wq), layer.bq);
    Tensor<T> k = add_row(matmul(x, layer.wk), layer.bk);
    Tensor<T> v = add_row(matmul(x, layer.wv), layer.bv);
    Tensor<T> heads_out;
    for (std::size_t i = 0; i < h; ++i) {
      Tensor<T> qi = slice_cols(q, i * dh, (i + 1) * dh);
      Tensor<T> ki = slice_cols(k, i * dh, (i + 1) * dh);
      Tensor<T> vi = slice_cols(v, i * dh, (i + 1) * dh);
      Tensor<T> attn = row_softmax(
          scale(matmul(qi, transposed(ki)), static_cast<T>(1.0 / std::sqrt(double(dh)))));
      if (attn_out) attn_out->push_back(attn);
      Tensor<T> oi = matmul(attn, vi);
      heads_out = i == 0 ? oi : concat(heads_out, oi);
    }
    return add_row(matmul(heads_out, layer.wo), layer.bo);
  }

  Tensor<T> feed_forward(const Layer& layer, const Tensor<T>& x) const {
    return add_row(matmul(gelu(add_row(matmul(x, layer.w1), layer.b1)), layer.w2), layer.b2);
  }

  ToyTransformerConfig config_;
  Tensor<T> token_table_;
  Tensor<T> position_table_;
  std::vector<Layer> layers_;
};

// ---------------------------------------------------------------------------
// Precomputed embeddings: binary PCEMB1 format
// ---------------------------------------------------------------------------
//
//   magic "PCEMB1\n"
//   u32-LE record count
//   per record: u16-LE id length, UTF-8 id, u32-LE N, u32-LE d_C,
//               (N+1) * d_C float32-LE (row 0 is [CLS])

namespace detail {

inline void write_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline bool read_exact(std::istream& is, void* dst, std::size_t n) {
  is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(is.gcount()) == n;
}

inline std::uint16_t read_u16(std::istream& is, const char* what) {
  unsigned char b[2];
  if (!read_exact(is, b, 2)) throw FormatError(std::string("truncated file reading ") + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!read_exact(is, b, 4)) throw FormatError(std::string("truncated file reading ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is, const char* what) {
  const std::uint32_t bits = read_u32(is, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void expect_magic(std::istream& is, const char* magic, const char* format_name) {
  const std::size_t len = std::strlen(magic);
  std::vector<char> buf(len);
  if (!read_exact(is, buf.data(), len) || std::memcmp(buf.data(), magic, len) != 0) {
    throw FormatError(std::string("not a ") + format_name + " file: bad magic bytes");
  }
}

}  // namespace detail

struct PrecomputedRecord {
  std::string id;
  std::uint32_t n_tokens = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;  // (n_tokens + 1) * dim, row 0 = [CLS]
};

inline void write_precomputed_embeddings(const std::string& path,
                                         const std::vector<PrecomputedRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("PCEMB1\n", 7);
  detail::write_u32(os, static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    if (rec.data.size() != static_cast<std::size_t>(rec.n_tokens + 1) * rec.dim) {
      throw ArgumentError("precomputed record '" + rec.id + "' has inconsistent data size");
    }
    detail::write_u16(os, static_cast<std::uint16_t>(rec.id.size()));
    os.write(rec.id.data(), static_cast<std::streamsize>(rec.id.size()));
    detail::write_u32(os, rec.n_tokens);
    detail::write_u32(os, rec.dim);
    for (float v : rec.data) detail::write_f32(os, v);
  }
  if (!os) throw IoError("failed writing " + path);
}

template <typename T>
class PrecomputedEncoder {
 public:
  static PrecomputedEncoder load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open embeddings file: " + path);
    detail::expect_magic(is, "PCEMB1\n", "PCEMB1");
    const std::uint32_t count = detail::read_u32(is, "record count");
    PrecomputedEncoder enc;
    for (std::uint32_t r = 0; r < count; ++r) {
      const std::uint16_t id_len = detail::read_u16(is, "id length");
      std::string id(id_len, '\0');
      if (!detail::read_exact(is, id.data(), id_len)) {
        throw FormatError("truncated file reading example id");
      }
      PrecomputedRecord rec;
      rec.id = id;
      rec.n_tokens = detail::read_u32(is, "token count");
      rec.dim = detail::read_u32(is, "embedding dim");
      if (enc.dim_ == 0) enc.dim_ = rec.dim;
      if (rec.dim != enc.dim_) {
        throw FormatError("embedding dim mismatch in record '" + id + "': " +
                          std::to_string(rec.dim) + " vs " + std::to_string(enc.dim_));
      }
      rec.data.resize(static_cast<std::size_t>(rec.n_tokens + 1) * rec.dim);
      for (float& v : rec.data) v = detail::read_f32(is, "embedding data");
      enc.records_.emplace(rec.id, std::move(rec));
    }
    return enc;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }

  ContextualEncoding<T> encode(const std::string& example_id, std::size_t n_tokens) const {
    auto it = records_.find(example_id);
    if (it == records_.end()) {
      throw LookupError("no precomputed embedding for example id '" + example_id + "'");
    }
    const PrecomputedRecord& rec = it->second;
    if (rec.n_tokens != n_tokens) {
      throw FormatError("example '" + example_id + "' has " + std::to_string(n_tokens) +
                        " tokens but the stored matrix covers " + std::to_string(rec.n_tokens));
    }
    std::vector<T> cls(rec.data.begin(), rec.data.begin() + rec.dim);
    std::vector<T> tokens(rec.data.begin() + rec.dim, rec.data.end());
    return {Tensor<T>::from({dim_}, std::move(cls)),
            Tensor<T>::from({n_tokens, dim_}, std::move(tokens))};
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, PrecomputedRecord> records_;
};

}  // namespace punnet
