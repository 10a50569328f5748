#pragma once

// Flat key/value run configuration. Values come from built-in defaults, an
// optional config file (PUNNET_CONFIG or --config), then command-line
// flags, in that order. The fully resolved config is echoed into every
// checkpoint and report.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "punnet/common.hpp"
#include "punnet/fusion.hpp"
#include "punnet/heads.hpp"
#include "punnet/model.hpp"
#include "punnet/phonattn.hpp"
#include "punnet/train.hpp"

namespace punnet {

struct RunConfig {
  std::string task = "detection";        // detection | location
  std::string encoder = "toy";           // toy | precomputed
  std::size_t d_c = 64;
  std::size_t d_p = 64;
  std::size_t d_a = 256;                 // heterographic puns tend to favor 32
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_len = 128;
  double lr = 5e-5;
  double dropout = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 42;
  bool strip_stress = true;
  bool use_pronunciation = true;         // false = context-only ablation
  std::string attn_variant = "vector";   // vector | scalar
  std::string alpha_p_variant = "softmax";  // softmax | raw-ratio
  std::string locate_mode = "argmax";    // argmax | threshold
  std::size_t folds = 10;
  std::size_t min_count = 1;
  std::string format = "canonical";      // canonical | semeval | ptd
  std::string subtask = "auto";          // semeval gold auto-detection override
  std::string cmudict;
  std::string dataset;
  std::string gold;
  std::string phoneme_init;
  std::string checkpoint;
  std::string locator_checkpoint;
  std::string embeddings;
  std::string out = ".";
  std::string dp_grid = "8,16,32,64,128,256,512";
  std::string da_grid = "8,16,32,64,128,256,512";

  static const std::vector<std::string>& valid_keys() {
    static const std::vector<std::string> keys = {
        "task",          "encoder",     "d_c",          "d_p",
        "d_a",           "layers",      "heads",        "max_len",
        "lr",            "dropout",     "batch_size",   "epochs",
        "seed",          "strip_stress", "use_pronunciation", "attn_variant",
        "alpha_p_variant", "locate_mode", "folds",      "min_count",
        "format",        "subtask",     "cmudict",      "dataset",
        "gold",          "phoneme_init", "checkpoint",  "locator_checkpoint",
        "embeddings",    "out",         "dp_grid",      "da_grid"};
    return keys;
  }

  void apply(const std::string& key, const std::string& value) {
    if (key == "task") task = value;
    else if (key == "encoder") encoder = value;
    else if (key == "d_c") d_c = parse_size(key, value);
    else if (key == "d_p") d_p = parse_size(key, value);
    else if (key == "d_a") d_a = parse_size(key, value);
    else if (key == "layers") layers = parse_size(key, value);
    else if (key == "heads") heads = parse_size(key, value);
    else if (key == "max_len") max_len = parse_size(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "dropout") dropout = parse_double(key, value);
    else if (key == "batch_size") batch_size = parse_size(key, value);
    else if (key == "epochs") epochs = parse_size(key, value);
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "strip_stress") strip_stress = parse_bool(key, value);
    else if (key == "use_pronunciation") use_pronunciation = parse_bool(key, value);
    else if (key == "attn_variant") attn_variant = value;
    else if (key == "alpha_p_variant") alpha_p_variant = value;
    else if (key == "locate_mode") locate_mode = value;
    else if (key == "folds") folds = parse_size(key, value);
    else if (key == "min_count") min_count = parse_size(key, value);
    else if (key == "format") format = value;
    else if (key == "subtask") subtask = value;
    else if (key == "cmudict") cmudict = value;
    else if (key == "dataset") dataset = value;
    else if (key == "gold") gold = value;
    else if (key == "phoneme_init") phoneme_init = value;
    else if (key == "checkpoint") checkpoint = value;
    else if (key == "locator_checkpoint") locator_checkpoint = value;
    else if (key == "embeddings") embeddings = value;
    else if (key == "out") out = value;
    else if (key == "dp_grid") dp_grid = value;
    else if (key == "da_grid") da_grid = value;
    else {
      std::string keys;
      for (const auto& k : valid_keys()) keys += (keys.empty() ? "" : ", ") + k;
      throw ArgumentError("unknown config key '" + key + "'; valid keys: " + keys);
    }
  }

  void validate() const {
    require_one_of("task", task, {"detection", "location"});
    require_one_of("encoder", encoder, {"toy", "precomputed"});
    require_one_of("attn_variant", attn_variant, {"vector", "scalar"});
    require_one_of("alpha_p_variant", alpha_p_variant, {"softmax", "raw-ratio"});
    require_one_of("locate_mode", locate_mode, {"argmax", "threshold"});
    require_one_of("format", format, {"canonical", "semeval", "ptd"});
    require_one_of("subtask", subtask, {"auto", "detection", "location"});
    if (dropout < 0.0 || dropout >= 1.0) throw ArgumentError("dropout must be in [0,1)");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (folds < 2) throw ArgumentError("folds must be >= 2");
  }

  nlohmann::json to_json() const {
    return {{"task", task},
            {"encoder", encoder},
            {"d_c", d_c},
            {"d_p", d_p},
            {"d_a", d_a},
            {"layers", layers},
            {"heads", heads},
            {"max_len", max_len},
            {"lr", lr},
            {"dropout", dropout},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"seed", seed},
            {"strip_stress", strip_stress},
            {"use_pronunciation", use_pronunciation},
            {"attn_variant", attn_variant},
            {"alpha_p_variant", alpha_p_variant},
            {"locate_mode", locate_mode},
            {"folds", folds},
            {"min_count", min_count},
            {"format", format},
            {"subtask", subtask},
            {"cmudict", cmudict},
            {"dataset", dataset},
            {"gold", gold},
            {"phoneme_init", phoneme_init},
            {"checkpoint", checkpoint},
            {"locator_checkpoint", locator_checkpoint},
            {"embeddings", embeddings},
            {"out", out},
            {"dp_grid", dp_grid},
            {"da_grid", da_grid}};
  }

  ModelConfig model_config() const {
    ModelConfig mc;
    mc.encoder = encoder == "precomputed" ? EncoderKind::Precomputed : EncoderKind::Toy;
    mc.d_c = d_c;
    mc.d_p = d_p;
    mc.d_a = d_a;
    mc.layers = layers;
    mc.heads = heads;
    mc.max_len = max_len;
    mc.use_pronunciation = use_pronunciation;
    mc.attn_variant = attn_variant == "scalar" ? AttnVariant::Scalar : AttnVariant::Vector;
    mc.alpha_variant =
        alpha_p_variant == "raw-ratio" ? AlphaVariant::RawRatio : AlphaVariant::Softmax;
    mc.dropout = dropout;
    return mc;
  }

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.lr = lr;
    tc.batch_size = batch_size;
    tc.dropout = dropout;
    tc.epochs = epochs;
    tc.seed = seed;
    tc.task = task == "location" ? Task::Location : Task::Detection;
    return tc;
  }

 private:
  static void require_one_of(const std::string& key, const std::string& value,
                             std::initializer_list<const char*> allowed) {
    std::string list;
    for (const char* a : allowed) {
      if (value == a) return;
      list += (list.empty() ? "" : ", ") + std::string(a);
    }
    throw ArgumentError("config key '" + key + "' must be one of {" + list + "}, got '" + value +
                        "'");
  }

  static std::size_t parse_size(const std::string& key, const std::string& value) {
    try {
      return static_cast<std::size_t>(std::stoull(value));
    } catch (...) {
      throw ArgumentError("config key '" + key + "' expects a non-negative integer, got '" +
                          value + "'");
    }
  }

  static std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    return parse_size(key, value);
  }

  static double parse_double(const std::string& key, const std::string& value) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (...) {
      throw ArgumentError("config key '" + key + "' expects a number, got '" + value + "'");
    }
  }

  static bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = to_lower_ascii(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ArgumentError("config key '" + key + "' expects a boolean, got '" + value + "'");
  }
};

// Config file: one `key = value` per line, '#' starts a comment.
inline void load_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + " line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    config.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline std::vector<std::size_t> parse_grid(const std::string& csv) {
  std::vector<std::size_t> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoull(item)));
    } catch (...) {
      throw ArgumentError("grid entry '" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw ArgumentError("empty sweep grid");
  return out;
}

}  // namespace punnet
