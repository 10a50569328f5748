// punnet: pronunciation-attentive pun detection and location.
//
// Subcommands: train, evaluate, cv, predict, pipeline, sweep,
// inspect-attention, grad-check, g2p. Exit codes: 0 success, 1 validation
// failure, 2 I/O error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "punnet/punnet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace punnet;

namespace {

// ---------------------------------------------------------------------------
// Config resolution: defaults -> PUNNET_CONFIG -> --config -> flags
// ---------------------------------------------------------------------------

struct CliState {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::set<std::string> explicit_keys;
};

void add_config_options(CLI::App* cmd, CliState& state) {
  cmd->add_option("--config", state.config_file, "config file of `key = value` lines");
  for (const auto& key : RunConfig::valid_keys()) {
    // Accept both --snake_case and --kebab-case spellings.
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {
      std::string kebab = key;
      for (char& c : kebab) {
        if (c == '_') c = '-';
      }
      names += ",--" + kebab;
    }
    cmd->add_option_function<std::string>(
           names,
           [key, &state](const std::string& value) {
             state.overrides.emplace_back(key, value);
             state.explicit_keys.insert(key);
           },
           "config key " + key)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

RunConfig resolve_config(const CliState& state) {
  RunConfig config;
  if (state.config_file.empty()) {
    if (const char* env = std::getenv("PUNNET_CONFIG")) {
      load_config_file(env, config);
    }
  } else {
    load_config_file(state.config_file, config);
  }
  for (const auto& [key, value] : state.overrides) config.apply(key, value);
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

std::vector<Example> load_dataset(const RunConfig& config) {
  if (config.dataset.empty()) throw ArgumentError("missing --dataset");
  std::vector<Example> raw;
  if (config.format == "canonical") {
    raw = load_canonical(config.dataset);
  } else if (config.format == "semeval") {
    if (config.gold.empty()) throw ArgumentError("semeval format needs --gold");
    SemEvalSubtask subtask = SemEvalSubtask::Auto;
    if (config.subtask == "detection") subtask = SemEvalSubtask::Detection;
    if (config.subtask == "location") subtask = SemEvalSubtask::Location;
    raw = adapt_semeval(config.dataset, config.gold, subtask);
  } else {
    raw = adapt_ptd(config.dataset);
  }
  PreprocessStats stats;
  auto data = preprocess_dataset(raw, &stats);
  if (stats.excluded > 0) {
    std::cerr << "preprocess: excluded " << stats.excluded
              << " example(s) that emptied out or lost their pun token\n";
  }
  if (data.empty()) throw ArgumentError("dataset is empty after preprocessing");
  return data;
}

PronunciationLexicon load_lexicon(const RunConfig& config) {
  if (config.cmudict.empty()) throw ArgumentError("missing --cmudict");
  return load_dictionary(config.cmudict, {.strip_stress = config.strip_stress});
}

Vocabulary vocab_from(const std::vector<Example>& examples, std::size_t min_count) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(examples.size());
  for (const auto& ex : examples) sentences.push_back(ex.tokens);
  return Vocabulary::build(sentences, min_count);
}

// Builds a fresh float model over the given training vocabulary.
PunModel<float> build_model(const RunConfig& config, const std::vector<Example>& train_set,
                             const PronunciationLexicon& lexicon, std::uint64_t seed) {
  Rng rng = seeded_rng(seed);
  ModelConfig mc = config.model_config();
  // The position table must cover every training sentence plus [CLS].
  for (const auto& ex : train_set) {
    mc.max_len = std::max(mc.max_len, ex.tokens.size() + 1);
  }
  PunModel<float> model = [&] {
    if (mc.encoder == EncoderKind::Precomputed) {
      if (config.embeddings.empty()) {
        throw ArgumentError("precomputed encoder needs --embeddings");
      }
      auto pre = std::make_shared<PrecomputedEncoder<float>>(
          PrecomputedEncoder<float>::load(config.embeddings));
      return PunModel<float>(mc, std::move(pre), lexicon.inventory(), rng);
    }
    return PunModel<float>(mc, vocab_from(train_set, config.min_count), lexicon.inventory(), rng);
  }();
  model.set_lexicon(&lexicon);
  if (config.use_pronunciation && !config.phoneme_init.empty()) {
    const std::size_t loaded = load_phoneme_vectors(config.phoneme_init, lexicon.inventory(),
                                                    model.phoneme_attention().table);
    std::cerr << "phoneme-init: loaded " << loaded << " vectors\n";
  }
  return model;
}

void write_report(const RunConfig& config, const json& body, const std::string& table) {
  fs::create_directories(config.out);
  json report = body;
  report["config"] = config.to_json();
  report["timestamp"] = timestamp_now();
  {
    std::ofstream os(fs::path(config.out) / "report.json");
    if (!os) throw IoError("cannot write report.json under " + config.out);
    os << report.dump(2) << "\n";
  }
  {
    std::ofstream os(fs::path(config.out) / "report.txt");
    if (!os) throw IoError("cannot write report.txt under " + config.out);
    os << "timestamp: " << report["timestamp"].get<std::string>() << "\n" << table;
  }
  std::cout << table;
}

std::string metrics_row(const std::string& name, const MetricsReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(2)
     << std::setw(10) << r.precision() << std::setw(10) << r.recall() << std::setw(10) << r.f1()
     << std::setw(8) << r.tp << std::setw(8) << r.fp << std::setw(8) << r.fn << "\n";
  return os.str();
}

std::string metrics_header() {
  std::ostringstream os;
  os << std::left << std::setw(10) << "" << std::right << std::setw(10) << "P" << std::setw(10)
     << "R" << std::setw(10) << "F1" << std::setw(8) << "tp" << std::setw(8) << "fp"
     << std::setw(8) << "fn" << "\n";
  return os.str();
}

json metrics_json(const MetricsReport& r) {
  return {{"tp", r.tp},       {"fp", r.fp},           {"fn", r.fn},
          {"precision", r.precision()}, {"recall", r.recall()}, {"f1", r.f1()}};
}

MetricsReport evaluate_for_task(const PunModel<float>& model,
                                const std::vector<Example>& dataset, Task task,
                                LocateMode mode) {
  return task == Task::Detection ? evaluate_detection(model, dataset)
                                 : evaluate_location(model, dataset, mode);
}

LocateMode locate_mode_of(const RunConfig& config) {
  return config.locate_mode == "threshold" ? LocateMode::Threshold : LocateMode::Argmax;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& config) {
  if (config.checkpoint.empty()) throw ArgumentError("missing --checkpoint output path");
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  auto [train_idx, dev_idx] = make_dev_split(dataset.size(), 0.1, config.seed);
  auto train_set = select(dataset, train_idx);
  auto dev_set = select(dataset, dev_idx);

  auto model = build_model(config, train_set, lexicon, config.seed);
  const TrainConfig tc = config.train_config();
  auto result = train(model, train_set, dev_set, tc);

  json epochs = json::array();
  std::ostringstream table;
  table << "epoch   loss      dev-P     dev-R     dev-F1\n";
  for (const auto& log : result.log) {
    epochs.push_back({{"epoch", log.epoch},
                      {"train_loss", log.train_loss},
                      {"dev", metrics_json(log.dev)}});
    table << std::left << std::setw(8) << log.epoch << std::fixed << std::setprecision(4)
          << std::setw(10) << log.train_loss << std::setprecision(2) << std::setw(10)
          << log.dev.precision() << std::setw(10) << log.dev.recall() << std::setw(10)
          << log.dev_f1 << "\n";
  }
  table << "best epoch: " << result.best_epoch << " (dev F1 " << std::fixed
        << std::setprecision(2) << result.best_dev_f1 << ")\n";

  save_model(model, config.checkpoint, config.to_json());
  table << "checkpoint: " << config.checkpoint << "\n";

  write_report(config,
               {{"command", "train"},
                {"epochs", epochs},
                {"best_epoch", result.best_epoch},
                {"best_dev_f1", result.best_dev_f1},
                {"train_examples", train_set.size()},
                {"dev_examples", dev_set.size()}},
               table.str());
  return 0;
}

int cmd_evaluate(const RunConfig& config, const CliState& state) {
  if (config.checkpoint.empty()) throw ArgumentError("missing --checkpoint");
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  auto loaded = load_model<float>(config.checkpoint, config.embeddings);
  loaded.model.set_lexicon(&lexicon);

  // The checkpoint remembers its task; an explicit --task wins.
  std::string task_name = config.task;
  if (!state.explicit_keys.count("task") && loaded.config.contains("run_config") &&
      loaded.config["run_config"].contains("task")) {
    task_name = loaded.config["run_config"]["task"].get<std::string>();
  }
  const Task task = task_name == "location" ? Task::Location : Task::Detection;

  auto report = evaluate_for_task(loaded.model, dataset, task, locate_mode_of(config));
  json body = {{"command", "evaluate"}, {"task", task_name}, {"metrics", metrics_json(report)}};
  std::ostringstream table;
  table << metrics_header() << metrics_row(task_name, report);
  if (task == Task::Detection) {
    std::size_t correct = 0;
    for (const auto& ex : dataset) {
      correct += loaded.model.detect(ex).label == ex.label ? 1 : 0;
    }
    const double accuracy = 100.0 * static_cast<double>(correct) / dataset.size();
    body["accuracy"] = accuracy;
    table << "accuracy: " << std::fixed << std::setprecision(2) << accuracy << "\n";
  }
  write_report(config, body, table.str());
  return 0;
}

struct FoldOutcome {
  std::size_t fold = 0;
  MetricsReport test;
};

std::vector<FoldOutcome> run_cv(const RunConfig& config, const std::vector<Example>& dataset,
                                const PronunciationLexicon& lexicon, std::uint64_t seed) {
  const FoldPlan plan = make_folds(dataset.size(), config.folds, seed);
  const TrainConfig base_tc = config.train_config();
  std::vector<FoldOutcome> outcomes;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    auto train_set = select(dataset, fold.train);
    auto dev_set = select(dataset, fold.dev);
    auto test_set = select(dataset, fold.test);
    auto model = build_model(config, train_set, lexicon, seed + f);
    TrainConfig tc = base_tc;
    tc.seed = seed + f;
    train(model, train_set, dev_set, tc);
    FoldOutcome out;
    out.fold = f;
    out.test = evaluate_for_task(model, test_set, tc.task, locate_mode_of(config));
    outcomes.push_back(out);
    std::cerr << "fold " << f << ": F1 " << std::fixed << std::setprecision(2) << out.test.f1()
              << "\n";
  }
  return outcomes;
}

json mean_of(const std::vector<FoldOutcome>& outcomes) {
  double p = 0, r = 0, f1 = 0;
  for (const auto& o : outcomes) {
    p += o.test.precision();
    r += o.test.recall();
    f1 += o.test.f1();
  }
  const double n = static_cast<double>(outcomes.size());
  return {{"precision", p / n}, {"recall", r / n}, {"f1", f1 / n}};
}

int cmd_cv(const RunConfig& config) {
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  auto outcomes = run_cv(config, dataset, lexicon, config.seed);

  json folds = json::array();
  std::ostringstream table;
  table << metrics_header();
  for (const auto& o : outcomes) {
    folds.push_back({{"fold", o.fold}, {"metrics", metrics_json(o.test)}});
    table << metrics_row("fold " + std::to_string(o.fold), o.test);
  }
  const json mean = mean_of(outcomes);
  std::ostringstream mean_row;
  mean_row << std::left << std::setw(10) << "mean" << std::right << std::fixed
           << std::setprecision(2) << std::setw(10) << mean["precision"].get<double>()
           << std::setw(10) << mean["recall"].get<double>() << std::setw(10)
           << mean["f1"].get<double>() << "\n";
  table << mean_row.str();

  write_report(config, {{"command", "cv"}, {"folds", folds}, {"mean", mean}}, table.str());
  return 0;
}

int cmd_predict(const RunConfig& config, const CliState& state) {
  if (config.checkpoint.empty()) throw ArgumentError("missing --checkpoint");
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  auto loaded = load_model<float>(config.checkpoint, config.embeddings);
  loaded.model.set_lexicon(&lexicon);

  std::string task_name = config.task;
  if (!state.explicit_keys.count("task") && loaded.config.contains("run_config") &&
      loaded.config["run_config"].contains("task")) {
    task_name = loaded.config["run_config"]["task"].get<std::string>();
  }
  for (const auto& ex : dataset) {
    json line = {{"id", ex.id}};
    if (task_name == "detection") {
      auto r = loaded.model.detect(ex);
      line["label"] = r.label;
      line["probability"] = {r.probability[0], r.probability[1]};
    } else {
      auto r = loaded.model.locate(ex);
      if (locate_mode_of(config) == LocateMode::Argmax) {
        line["pun_index"] = r.index;
      } else {
        line["pun_indices"] = threshold_locations(r);
      }
      line["positive_probability"] = r.positive_probability;
    }
    std::cout << line.dump() << "\n";
  }
  return 0;
}

int cmd_pipeline(const RunConfig& config) {
  if (config.checkpoint.empty() || config.locator_checkpoint.empty()) {
    throw ArgumentError("pipeline needs --checkpoint (detector) and --locator_checkpoint");
  }
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  auto detector = load_model<float>(config.checkpoint, config.embeddings);
  detector.model.set_lexicon(&lexicon);
  auto locator = load_model<float>(config.locator_checkpoint, config.embeddings);
  locator.model.set_lexicon(&lexicon);

  auto report = pipeline_eval(
      [&](const Example& ex) { return detector.model.detect(ex).label; },
      [&](const Example& ex) { return locator.model.locate(ex).index; }, dataset);
  std::ostringstream table;
  table << metrics_header() << metrics_row("pipeline", report);
  write_report(config, {{"command", "pipeline"}, {"metrics", metrics_json(report)}}, table.str());
  return 0;
}

int cmd_sweep(const RunConfig& config) {
  auto lexicon = load_lexicon(config);
  auto dataset = load_dataset(config);
  const auto dp_grid = parse_grid(config.dp_grid);
  const auto da_grid = parse_grid(config.da_grid);

  fs::create_directories(config.out);
  const auto csv_path = fs::path(config.out) / "sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << "d_P,d_A,fold,precision,recall,f1\n";

  std::ostringstream table;
  table << "  d_P   d_A   mean-F1\n";
  for (std::size_t dp : dp_grid) {
    for (std::size_t da : da_grid) {
      RunConfig cell = config;
      cell.d_p = dp;
      cell.d_a = da;
      auto outcomes = run_cv(cell, dataset, lexicon, config.seed);
      double mean_f1 = 0;
      for (const auto& o : outcomes) {
        csv << dp << ',' << da << ',' << o.fold << ',' << std::fixed << std::setprecision(4)
            << o.test.precision() << ',' << o.test.recall() << ',' << o.test.f1() << "\n";
        mean_f1 += o.test.f1();
      }
      mean_f1 /= static_cast<double>(outcomes.size());
      table << std::setw(5) << dp << std::setw(6) << da << std::setw(10) << std::fixed
            << std::setprecision(2) << mean_f1 << "\n";
      std::cerr << "sweep cell d_P=" << dp << " d_A=" << da << " mean F1 " << std::fixed
                << std::setprecision(2) << mean_f1 << "\n";
    }
  }
  std::cout << table.str();
  std::cout << "csv: " << csv_path.string() << "\n";
  return 0;
}

int cmd_inspect_attention(const RunConfig& config, const std::vector<std::string>& tokens,
                          long word_index) {
  if (config.checkpoint.empty()) throw ArgumentError("missing --checkpoint");
  if (tokens.empty()) throw ArgumentError("inspect-attention needs sentence tokens");
  auto lexicon = load_lexicon(config);
  auto loaded = load_model<float>(config.checkpoint, config.embeddings);
  loaded.model.set_lexicon(&lexicon);

  Example ex;
  ex.id = "inspect";
  ex.tokens = tokens;
  auto pre = preprocess_example(ex);
  if (!pre) throw ArgumentError("sentence is empty after preprocessing");
  auto out = loaded.model.forward(*pre);

  // Salience per token: mean of its alpha^S vector.
  const auto& alpha = out.joint.alpha;
  const std::size_t n = alpha.rows(), d = alpha.cols();
  std::vector<double> salience(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) salience[i] += alpha.value()[i * d + j];
    salience[i] /= static_cast<double>(d);
  }
  std::size_t chosen = 0;
  if (word_index >= 0) {
    if (static_cast<std::size_t>(word_index) >= n) {
      throw ArgumentError("--word index out of range");
    }
    chosen = static_cast<std::size_t>(word_index);
  } else {
    for (std::size_t i = 1; i < n; ++i) {
      if (salience[i] > salience[chosen]) chosen = i;
    }
  }

  std::cout << "token salience:\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::cout << "  " << std::left << std::setw(16) << pre->tokens[i] << std::fixed
              << std::setprecision(4) << salience[i] << (i == chosen ? "  *" : "") << "\n";
  }
  if (!out.alpha_p.empty()) {
    const auto pron = lexicon.lookup(pre->tokens[chosen]);
    const auto& weights = out.alpha_p[chosen];
    std::cout << "phoneme attention for '" << pre->tokens[chosen] << "':\n";
    for (std::size_t j = 0; j < weights.size(); ++j) {
      std::cout << "  " << std::left << std::setw(6)
                << lexicon.inventory().symbol(pron.phoneme_ids[j]) << std::fixed
                << std::setprecision(4) << weights.value()[j] << "\n";
    }
  }
  return 0;
}

// The 64-bit finite-difference suite over the composed model.
int cmd_grad_check(const RunConfig& config, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = config.seed + t;
    auto corpus = [&] {
      std::istringstream dict(
          "SAIL  S EY1 L\nSALE  S EY1 L\nSTORE  S T AO1 R\nTHE  DH AH0\n"
          "DOG  D AO1 G\nCAT  K AE1 T\nSUN  S AH1 N\nSON  S AH1 N\n");
      return parse_dictionary(dict);
    }();
    Vocabulary vocab = Vocabulary::build(
        {{"the", "store", "sail", "dog", "cat", "sun", "son", "sale"}}, 1);
    ModelConfig mc;
    mc.d_c = 8;
    mc.d_p = 8;
    mc.d_a = 8;
    mc.layers = 2;
    mc.heads = 2;
    mc.max_len = 8;
    mc.dropout = 0.0;
    mc.attn_variant = config.attn_variant == "scalar" ? AttnVariant::Scalar : AttnVariant::Vector;
    Rng rng = seeded_rng(seed);
    PunModel<double> model(mc, vocab, corpus.inventory(), rng);
    model.set_lexicon(&corpus);

    Example pos;
    pos.id = "g1";
    pos.tokens = {"the", "store", "sail", "dog"};
    pos.label = 1;
    pos.pun_index = 2;
    Example neg;
    neg.id = "g2";
    neg.tokens = {"the", "dog", "cat"};
    neg.label = 0;
    auto forward = [&] {
      return add(model.loss({pos, neg}, Task::Detection), model.loss({pos}, Task::Location));
    };
    auto report = grad_check<double>(model.parameters(), forward);
    std::cout << "seed " << seed << ": max rel err " << std::scientific
              << std::setprecision(2) << report.max_rel_err << " over "
              << report.coords_checked << " coordinates (worst: " << report.worst_param
              << ")\n";
    worst = std::max(worst, report.max_rel_err);
  }
  const bool pass = worst < 1e-6;
  std::cout << "max rel err " << std::scientific << std::setprecision(2) << worst
            << (pass ? " < 1e-6, PASS" : " >= 1e-6, FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_g2p(const RunConfig& config, const std::vector<std::string>& words) {
  auto lexicon = load_lexicon(config);
  if (words.empty()) throw ArgumentError("g2p needs at least one word");
  for (const auto& word : words) {
    const auto pron = lexicon.lookup(word);
    std::cout << word;
    for (int id : pron.phoneme_ids) std::cout << ' ' << lexicon.inventory().symbol(id);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pronunciation-attentive pun detection and location"};
  app.require_subcommand(1);

  CliState state;
  std::vector<std::string> words;  // g2p / inspect-attention positionals
  long word_index = -1;            // inspect-attention --word
  std::size_t grad_trials = 5;

  auto* train_cmd = app.add_subcommand("train", "train a detector or locator");
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
  auto* cv_cmd = app.add_subcommand("cv", "10-fold cross-validation protocol");
  auto* predict_cmd = app.add_subcommand("predict", "emit per-example predictions as JSONL");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "detect-then-locate evaluation");
  auto* sweep_cmd = app.add_subcommand("sweep", "grid d_P x d_A, CSV of per-fold F1");
  auto* inspect_cmd =
      app.add_subcommand("inspect-attention", "token salience and phoneme weights");
  auto* grad_cmd = app.add_subcommand("grad-check", "64-bit finite-difference verification");
  auto* g2p_cmd = app.add_subcommand("g2p", "print dictionary phonemes for words");

  for (auto* cmd : {train_cmd, eval_cmd, cv_cmd, predict_cmd, pipeline_cmd, sweep_cmd,
                    inspect_cmd, grad_cmd, g2p_cmd}) {
    add_config_options(cmd, state);
  }
  inspect_cmd->add_option("tokens", words, "sentence tokens");
  inspect_cmd->add_option("--word", word_index,
                          "word index for phoneme weights (default: max salience)");
  g2p_cmd->add_option("words", words, "words to phonemize");
  grad_cmd->add_option("--trials", grad_trials, "number of seeds to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0 && dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr) {
      std::cerr << "valid config keys:";
      for (const auto& key : RunConfig::valid_keys()) std::cerr << " " << key;
      std::cerr << "\n";
    }
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig config = resolve_config(state);
    if (app.got_subcommand(train_cmd)) return cmd_train(config);
    if (app.got_subcommand(eval_cmd)) return cmd_evaluate(config, state);
    if (app.got_subcommand(cv_cmd)) return cmd_cv(config);
    if (app.got_subcommand(predict_cmd)) return cmd_predict(config, state);
    if (app.got_subcommand(pipeline_cmd)) return cmd_pipeline(config);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(config);
    if (app.got_subcommand(inspect_cmd)) return cmd_inspect_attention(config, words, word_index);
    if (app.got_subcommand(grad_cmd)) return cmd_grad_check(config, grad_trials);
    if (app.got_subcommand(g2p_cmd)) return cmd_g2p(config, words);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
