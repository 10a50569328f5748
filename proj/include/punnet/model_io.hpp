#pragma once

// Model <-> checkpoint glue. The checkpoint's config blob is JSON holding
// the resolved architecture, the vocabulary, the inventory name, and
// whatever run configuration the caller wants echoed.

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "punnet/checkpoint.hpp"
#include "punnet/model.hpp"

namespace punnet {

inline nlohmann::json model_config_json(const ModelConfig& c) {
  return {{"encoder", to_string(c.encoder)},
          {"d_c", c.d_c},
          {"d_p", c.d_p},
          {"d_a", c.d_a},
          {"layers", c.layers},
          {"heads", c.heads},
          {"max_len", c.max_len},
          {"use_pronunciation", c.use_pronunciation},
          {"attn_variant", to_string(c.attn_variant)},
          {"alpha_variant", to_string(c.alpha_variant)},
          {"dropout", c.dropout}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  const std::string enc = j.at("encoder").get<std::string>();
  if (enc == "toy") {
    c.encoder = EncoderKind::Toy;
  } else if (enc == "precomputed") {
    c.encoder = EncoderKind::Precomputed;
  } else {
    throw FormatError("unknown encoder kind '" + enc + "' in checkpoint config");
  }
  c.d_c = j.at("d_c").get<std::size_t>();
  c.d_p = j.at("d_p").get<std::size_t>();
  c.d_a = j.at("d_a").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.use_pronunciation = j.at("use_pronunciation").get<bool>();
  const std::string attn = j.at("attn_variant").get<std::string>();
  c.attn_variant = attn == "scalar" ? AttnVariant::Scalar : AttnVariant::Vector;
  const std::string alpha = j.at("alpha_variant").get<std::string>();
  c.alpha_variant = alpha == "raw-ratio" ? AlphaVariant::RawRatio : AlphaVariant::Softmax;
  c.dropout = j.at("dropout").get<double>();
  return c;
}

template <typename T>
void save_model(const PunModel<T>& model, const std::string& path,
                const nlohmann::json& run_config = nlohmann::json::object()) {
  nlohmann::json blob;
  blob["model"] = model_config_json(model.config());
  blob["vocab"] = model.vocab().words();
  blob["inventory"] =
      model.inventory().size() == PhonemeInventory::arpabet().size() ? "arpabet"
                                                                     : "arpabet_stressed";
  blob["run_config"] = run_config;
  save_checkpoint(path, model.parameters(), blob.dump(2));
}

template <typename T>
struct LoadedModel {
  PunModel<T> model;
  nlohmann::json config;  // the full stored blob
};

// `embeddings_path` overrides the stored path for precomputed-encoder
// checkpoints; pass empty to use the one recorded in the config blob.
template <typename T>
LoadedModel<T> load_model(const std::string& path, const std::string& embeddings_path = "") {
  CheckpointData data = load_checkpoint(path);
  nlohmann::json blob;
  try {
    blob = nlohmann::json::parse(data.config_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint config blob is not valid JSON: " + std::string(e.what()));
  }
  ModelConfig config = model_config_from_json(blob.at("model"));
  const PhonemeInventory& inventory = blob.value("inventory", "arpabet") == "arpabet_stressed"
                                          ? PhonemeInventory::arpabet_stressed()
                                          : PhonemeInventory::arpabet();
  Rng rng = seeded_rng(0);  // initial values are overwritten below
  LoadedModel<T> out;
  if (config.encoder == EncoderKind::Toy) {
    Vocabulary vocab = Vocabulary::from_words(blob.at("vocab").get<std::vector<std::string>>());
    out.model = PunModel<T>(config, std::move(vocab), inventory, rng);
  } else {
    std::string emb = embeddings_path;
    if (emb.empty()) emb = blob.at("run_config").value("embeddings", "");
    if (emb.empty()) {
      throw FormatError("precomputed-encoder checkpoint needs an embeddings file path");
    }
    auto pre = std::make_shared<PrecomputedEncoder<T>>(PrecomputedEncoder<T>::load(emb));
    out.model = PunModel<T>(config, std::move(pre), inventory, rng);
  }
  out.config = blob;

  for (auto& [name, tensor] : out.model.parameters()) {
    const RawTensor* stored = data.find(name);
    if (!stored) throw FormatError("checkpoint is missing tensor '" + name + "'");
    if (stored->shape != tensor.shape()) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " + shape_str(stored->shape) +
                        ", model expects " + shape_str(tensor.shape()));
    }
    auto& value = tensor.mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] = static_cast<T>(stored->data[i]);
  }
  return out;
}

}  // namespace punnet
