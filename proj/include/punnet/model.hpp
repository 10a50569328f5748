#pragma once

// The assembled pun-recognition model: contextual encoder -> pronunciation
// attention -> fusion -> detection/location heads. Detection and location
// are trained as separate model instances sharing this architecture.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "punnet/data.hpp"
#include "punnet/encoder.hpp"
#include "punnet/fusion.hpp"
#include "punnet/heads.hpp"
#include "punnet/phonattn.hpp"
#include "punnet/phonodict.hpp"
#include "punnet/tensor.hpp"
#include "punnet/vocab.hpp"

namespace punnet {

enum class EncoderKind { Toy, Precomputed };

inline const char* to_string(EncoderKind k) {
  return k == EncoderKind::Toy ? "toy" : "precomputed";
}

struct ModelConfig {
  EncoderKind encoder = EncoderKind::Toy;
  std::size_t d_c = 64;
  std::size_t d_p = 64;
  std::size_t d_a = 256;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_len = 128;
  bool use_pronunciation = true;  // false = context-only ablation
  AttnVariant attn_variant = AttnVariant::Vector;
  AlphaVariant alpha_variant = AlphaVariant::Softmax;
  double dropout = 0.1;

  std::size_t d_j() const { return d_c + (use_pronunciation ? d_p : 0); }
  std::size_t cls_dim() const { return d_c + d_j(); }
};

template <typename T>
struct ModelOutput {
  ContextualEncoding<T> context;
  std::vector<Tensor<T>> alpha_p;  // per-word phoneme weights (empty if disabled)
  JointEncoding<T> joint;
  Tensor<T> det_logits;  // {2}
  Tensor<T> loc_logits;  // [N, 2]
};

template <typename T>
class PunModel {
 public:
  PunModel() = default;

  // Trainable toy-transformer configuration.
  PunModel(ModelConfig config, Vocabulary vocab, const PhonemeInventory& inventory, Rng& rng)
      : config_(config), vocab_(std::move(vocab)), inventory_(&inventory) {
    ToyTransformerConfig tc;
    tc.layers = config_.layers;
    tc.heads = config_.heads;
    tc.d_model = config_.d_c;
    tc.max_len = config_.max_len;
    tc.vocab_size = vocab_.size();
    toy_ = std::make_shared<ToyTransformer<T>>(tc, rng);
    init_common(rng);
  }

  // Frozen precomputed-embedding configuration; d_C comes from the file.
  PunModel(ModelConfig config, std::shared_ptr<PrecomputedEncoder<T>> precomputed,
            const PhonemeInventory& inventory, Rng& rng)
      : config_(config), inventory_(&inventory), precomputed_(std::move(precomputed)) {
    if (!precomputed_ || precomputed_->dim() == 0) {
      throw ArgumentError("precomputed encoder is empty");
    }
    config_.encoder = EncoderKind::Precomputed;
    config_.d_c = precomputed_->dim();
    init_common(rng);
  }

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const PhonemeInventory& inventory() const { return *inventory_; }
  const PronunciationLexicon* lexicon() const { return lexicon_; }
  PhonemeAttention<T>& phoneme_attention() { return phon_; }
  const PhonemeAttention<T>& phoneme_attention() const { return phon_; }

  // The lexicon supplies pronunciations at forward time; it outlives the
  // model and is only needed when pronunciations are enabled.
  void set_lexicon(const PronunciationLexicon* lexicon) { lexicon_ = lexicon; }

  void set_dropout(double p) {
    if (p < 0.0 || p >= 1.0) throw ArgumentError("dropout must be in [0,1)");
    config_.dropout = p;
  }

  ModelOutput<T> forward(const Example& ex, bool train = false, Rng* rng = nullptr) const {
    if (ex.tokens.empty()) throw ArgumentError("forward: example '" + ex.id + "' has no tokens");
    ModelOutput<T> out;
    out.context = encode_context(ex);

    Tensor<T> tj;
    if (config_.use_pronunciation) {
      if (!lexicon_) throw ArgumentError("model uses pronunciations but no lexicon is set");
      const auto prons = lexicon_->phonemize(ex.tokens);
      Tensor<T> tp = phon_.embed_sentence(prons, &out.alpha_p);
      tj = joint_concat(out.context.tokens, tp);
    } else {
      tj = out.context.tokens;
    }
    tj = dropout(tj, config_.dropout, train, rng);

    SelfAttendOut<T> sa = self_attend(tj, config_.attn_variant);
    Tensor<T> cls_joint = cls_concat(out.context.cls, sa.sentence);
    out.joint = JointEncoding<T>{tj, sa.alpha, sa.attended, sa.sentence, cls_joint};

    out.det_logits = det_head_(dropout(cls_joint, config_.dropout, train, rng));
    out.loc_logits = loc_head_(dropout(sa.attended, config_.dropout, train, rng));
    return out;
  }

  DetectionResult detect(const Example& ex) const {
    return decide_detection(forward(ex).det_logits);
  }

  LocationResult locate(const Example& ex) const {
    return decide_location(forward(ex).loc_logits);
  }

  // Mean cross-entropy: per sentence for detection, per token over the whole
  // batch for location (positive label only on the gold pun token).
  Tensor<T> loss(const std::vector<Example>& batch, Task task, bool train = false,
                 Rng* rng = nullptr) const {
    if (batch.empty()) throw ArgumentError("loss: empty batch");
    Tensor<T> total;
    std::size_t token_count = 0;
    for (const auto& ex : batch) {
      ModelOutput<T> out = forward(ex, train, rng);
      Tensor<T> term;
      if (task == Task::Detection) {
        term = cross_entropy_with_logits(out.det_logits, {ex.label}, Reduction::Sum);
      } else {
        if (!ex.pun_index) {
          throw ArgumentError("location loss: example '" + ex.id + "' has no pun label");
        }
        std::vector<int> labels(ex.tokens.size(), 0);
        labels[*ex.pun_index] = 1;
        term = cross_entropy_with_logits(out.loc_logits, labels, Reduction::Sum);
        token_count += ex.tokens.size();
      }
      total = total.defined() ? add(total, term) : term;
    }
    const std::size_t denom = task == Task::Detection ? batch.size() : token_count;
    return scale(total, static_cast<T>(1.0 / static_cast<double>(denom)));
  }

  std::vector<std::pair<std::string, Tensor<T>>> parameters() const {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    if (toy_) {
      auto enc = toy_->parameters();
      out.insert(out.end(), enc.begin(), enc.end());
    }
    if (config_.use_pronunciation) {
      auto ph = phon_.parameters();
      out.insert(out.end(), ph.begin(), ph.end());
    }
    out.emplace_back("head.detect.w", det_head_.w);
    out.emplace_back("head.detect.b", det_head_.b);
    out.emplace_back("head.locate.w", loc_head_.w);
    out.emplace_back("head.locate.b", loc_head_.b);
    return out;
  }

  std::vector<Tensor<T>> parameter_tensors() const {
    std::vector<Tensor<T>> out;
    for (auto& [name, t] : parameters()) out.push_back(t);
    return out;
  }

 private:
  void init_common(Rng& rng) {
    if (config_.use_pronunciation) {
      phon_ = PhonemeAttention<T>(inventory_->size(), config_.d_p, config_.d_a, rng,
                                  config_.alpha_variant);
    }
    det_head_ = BinaryHead<T>(config_.cls_dim(), rng);
    loc_head_ = BinaryHead<T>(config_.d_j(), rng);
  }

  ContextualEncoding<T> encode_context(const Example& ex) const {
    if (config_.encoder == EncoderKind::Toy) {
      return toy_->encode(vocab_.ids(ex.tokens));
    }
    return precomputed_->encode(ex.id, ex.tokens.size());
  }

  ModelConfig config_;
  Vocabulary vocab_;
  const PhonemeInventory* inventory_ = nullptr;
  const PronunciationLexicon* lexicon_ = nullptr;
  std::shared_ptr<ToyTransformer<T>> toy_;
  std::shared_ptr<PrecomputedEncoder<T>> precomputed_;
  PhonemeAttention<T> phon_;
  BinaryHead<T> det_head_;
  BinaryHead<T> loc_head_;
};

}  // namespace punnet
