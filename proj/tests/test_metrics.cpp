#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "punnet/metrics.hpp"
#include "punnet/rng.hpp"

using namespace punnet;

TEST_CASE("analytic detection counts", "[metrics]") {
  // tp=2 fp=1 fn=1
  auto r = score_detection({1, 1, 1, 0, 0}, {1, 1, 0, 1, 0});
  CHECK(r.tp == 2);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision() == Catch::Approx(100.0 * 2 / 3));
  CHECK(r.recall() == Catch::Approx(100.0 * 2 / 3));
  CHECK(r.f1() == Catch::Approx(100.0 * 2 / 3));
}

TEST_CASE("perfect predictions score one hundred", "[metrics]") {
  auto r = score_detection({1, 0, 1}, {1, 0, 1});
  CHECK(r.precision() == 100.0);
  CHECK(r.recall() == 100.0);
  CHECK(r.f1() == 100.0);
}

TEST_CASE("zero denominators define zero scores", "[metrics]") {
  auto r = score_detection({0, 0}, {1, 1});
  CHECK(r.precision() == 0.0);  // no positive predictions
  CHECK(r.recall() == 0.0);
  CHECK(r.f1() == 0.0);
}

TEST_CASE("location scoring in argmax mode keeps precision equal to recall",
          "[metrics]") {
  std::vector<std::vector<std::size_t>> preds = {{2}, {0}, {1}};
  std::vector<std::optional<std::size_t>> golds = {2, 1, 1};
  auto r = score_location(preds, golds);
  CHECK(r.tp == 2);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision() == r.recall());
}

TEST_CASE("threshold-mode location predictions can be empty or multiple", "[metrics]") {
  std::vector<std::vector<std::size_t>> preds = {{}, {0, 2}};
  std::vector<std::optional<std::size_t>> golds = {1, 2};
  auto r = score_location(preds, golds);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
}

TEST_CASE("metric formulas hold on random count triples", "[metrics][property]") {
  Rng rng = seeded_rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    MetricsReport r;
    r.tp = rng() % 20;
    r.fp = rng() % 20;
    r.fn = rng() % 20;
    const double p = r.tp + r.fp == 0 ? 0.0 : 100.0 * r.tp / double(r.tp + r.fp);
    const double rec = r.tp + r.fn == 0 ? 0.0 : 100.0 * r.tp / double(r.tp + r.fn);
    const double f1 = p + rec == 0 ? 0.0 : 2 * p * rec / (p + rec);
    CHECK(r.precision() == Catch::Approx(p).margin(1e-12));
    CHECK(r.recall() == Catch::Approx(rec).margin(1e-12));
    CHECK(r.f1() == Catch::Approx(f1).margin(1e-12));
  }
}

namespace {

Example make_example(std::string id, std::size_t n_tokens, std::optional<std::size_t> pun) {
  Example ex;
  ex.id = std::move(id);
  for (std::size_t i = 0; i < n_tokens; ++i) ex.tokens.push_back("w" + std::to_string(i));
  ex.pun_index = pun;
  ex.label = pun ? 1 : 0;
  return ex;
}

}  // namespace

TEST_CASE("pipeline on perfect components is perfect", "[metrics]") {
  std::vector<Example> data = {make_example("a", 4, 1), make_example("b", 3, std::nullopt),
                               make_example("c", 5, 4)};
  auto r = pipeline_eval([](const Example& ex) { return ex.label; },
                         [](const Example& ex) { return *ex.pun_index; }, data);
  CHECK(r.f1() == 100.0);
}

TEST_CASE("pipeline with a reject-everything detector has zero recall", "[metrics]") {
  std::vector<Example> data = {make_example("a", 4, 1), make_example("b", 3, std::nullopt)};
  auto r = pipeline_eval([](const Example&) { return 0; },
                         [](const Example&) { return std::size_t{0}; }, data);
  CHECK(r.recall() == 0.0);
  CHECK(r.tp == 0);
  CHECK(r.fn == 1);
}

TEST_CASE("six-sentence pipeline matches the hand-derived confusion table", "[metrics][oracle]") {
  // s1: gold pun@2, detected, located right        -> tp
  // s2: gold pun@0, detected, located wrong (1)    -> fp + fn
  // s3: gold pun@1, rejected by the detector       -> fn
  // s4: gold negative, rejected                    -> nothing
  // s5: gold negative, detected, located (0)       -> fp
  // s6: gold pun@3, detected, located right        -> tp
  std::vector<Example> data = {
      make_example("s1", 4, 2),           make_example("s2", 3, 0),
      make_example("s3", 5, 1),           make_example("s4", 3, std::nullopt),
      make_example("s5", 4, std::nullopt), make_example("s6", 6, 3)};
  const std::map<std::string, int> det = {{"s1", 1}, {"s2", 1}, {"s3", 0},
                                          {"s4", 0}, {"s5", 1}, {"s6", 1}};
  const std::map<std::string, std::size_t> loc = {
      {"s1", 2}, {"s2", 1}, {"s3", 0}, {"s4", 0}, {"s5", 0}, {"s6", 3}};
  auto r = pipeline_eval([&](const Example& ex) { return det.at(ex.id); },
                         [&](const Example& ex) { return loc.at(ex.id); }, data);
  CHECK(r.tp == 2);
  CHECK(r.fp == 2);
  CHECK(r.fn == 2);
  CHECK(r.precision() == Catch::Approx(50.0));
  CHECK(r.recall() == Catch::Approx(50.0));
  CHECK(r.f1() == Catch::Approx(50.0));
}

TEST_CASE("a sentence lost at detection can never be located", "[metrics][property]") {
  // Pipeline recall is bounded by detection recall on punned sentences.
  Rng rng = seeded_rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Example> data;
    std::map<std::string, int> det;
    std::size_t detected_punned = 0, punned = 0;
    for (int i = 0; i < 12; ++i) {
      const bool has_pun = rng() % 2 == 0;
      const std::size_t n = 2 + rng() % 4;
      auto ex = make_example("e" + std::to_string(i), n,
                             has_pun ? std::optional<std::size_t>(rng() % n) : std::nullopt);
      const int d = rng() % 2;
      det[ex.id] = d;
      if (has_pun) {
        ++punned;
        if (d == 1) ++detected_punned;
      }
      data.push_back(std::move(ex));
    }
    auto r = pipeline_eval([&](const Example& ex) { return det.at(ex.id); },
                           [&](const Example& ex) { return rng() % ex.tokens.size(); }, data);
    CHECK(r.tp <= detected_punned);
    CHECK(r.tp + r.fn == punned);
  }
}
