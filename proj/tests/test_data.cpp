#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "punnet/data.hpp"

using namespace punnet;

namespace {

std::string write_temp(const char* name, const std::string& content) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

constexpr const char* kSemEvalXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<corpus language="en">
<text id="hom_1">
<word id="hom_1_1">When</word>
<word id="hom_1_2">the</word>
<word id="hom_1_3">store</word>
<word id="hom_1_4">sail</word>
<word id="hom_1_5">ended</word>
</text>
<text id="hom_2">
<word id="hom_2_1">Nothing</word>
<word id="hom_2_2">funny</word>
<word id="hom_2_3">here</word>
</text>
</corpus>
)";

}  // namespace

TEST_CASE("preprocess drops numeric and punctuation tokens", "[data]") {
  auto pre = preprocess_tokens({"It", "costs", "12", "dollars", "!"});
  CHECK(pre.tokens == std::vector<std::string>{"It", "costs", "dollars"});
}

TEST_CASE("preprocess keeps intra-word apostrophes and hyphens", "[data]") {
  auto pre = preprocess_tokens({"don't", "over-the-top", "--", "..."});
  CHECK(pre.tokens == std::vector<std::string>{"don't", "over-the-top"});
}

TEST_CASE("preprocess remaps the gold pun index", "[data]") {
  Example ex;
  ex.id = "x";
  ex.tokens = {"He", "paid", "12", "bucks", "!"};
  ex.label = 1;
  ex.pun_index = 3;  // "bucks"
  auto out = preprocess_example(ex);
  REQUIRE(out.has_value());
  CHECK(out->tokens == std::vector<std::string>{"He", "paid", "bucks"});
  CHECK(out->pun_index == 2);
}

TEST_CASE("sentences that empty out are excluded with a count", "[data]") {
  Example ex;
  ex.id = "x";
  ex.tokens = {"!!", "12", "?"};
  CHECK_FALSE(preprocess_example(ex).has_value());

  PreprocessStats stats;
  Example ok;
  ok.id = "y";
  ok.tokens = {"fine"};
  auto kept = preprocess_dataset({ex, ok}, &stats);
  CHECK(kept.size() == 1);
  CHECK(stats.excluded == 1);
}

TEST_CASE("canonical jsonl round trips losslessly", "[data]") {
  std::vector<Example> dataset;
  Example a;
  a.id = "a";
  a.tokens = {"the", "best", "sail"};
  a.label = 1;
  a.pun_index = 2;
  Example b;
  b.id = "b";
  b.tokens = {"nothing", "here"};
  b.label = 0;
  dataset = {a, b};

  std::ostringstream os;
  write_canonical(os, dataset);
  std::istringstream is(os.str());
  auto back = read_canonical(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].tokens == a.tokens);
  CHECK(back[0].label == 1);
  CHECK(back[0].pun_index == 2);
  CHECK(back[1].pun_index == std::nullopt);
}

TEST_CASE("canonical loader reports schema errors with line numbers", "[data]") {
  SECTION("missing tokens") {
    std::istringstream is(R"({"id":"a","label":0})");
    try {
      read_canonical(is);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }
  SECTION("pun index out of range") {
    std::istringstream is(
        "{\"id\":\"a\",\"tokens\":[\"x\"],\"label\":1,\"pun_index\":0}\n"
        "{\"id\":\"b\",\"tokens\":[\"x\",\"y\"],\"label\":1,\"pun_index\":2}\n");
    try {
      read_canonical(is);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SECTION("pun index with negative label") {
    std::istringstream is(R"({"id":"a","tokens":["x"],"label":0,"pun_index":0})");
    CHECK_THROWS_AS(read_canonical(is), FormatError);
  }
  SECTION("duplicate ids") {
    std::istringstream is(
        "{\"id\":\"a\",\"tokens\":[\"x\"],\"label\":0}\n"
        "{\"id\":\"a\",\"tokens\":[\"y\"],\"label\":0}\n");
    CHECK_THROWS_AS(read_canonical(is), FormatError);
  }
}

TEST_CASE("semeval location gold maps word ids to 0-based indices", "[data]") {
  const auto xml = write_temp("punnet_semeval.xml", kSemEvalXml);
  const auto gold = write_temp("punnet_semeval_loc.gold", "hom_1\thom_1_4\nhom_2\thom_2_2\n");
  auto examples = adapt_semeval(xml, gold, SemEvalSubtask::Location);
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].id == "hom_1");
  CHECK(examples[0].tokens.size() == 5);
  CHECK(examples[0].label == 1);
  CHECK(examples[0].pun_index == 3);  // 4th word
  CHECK(examples[1].pun_index == 1);
  std::remove(xml.c_str());
  std::remove(gold.c_str());
}

TEST_CASE("semeval detection gold yields labels without pun indices", "[data]") {
  const auto xml = write_temp("punnet_semeval2.xml", kSemEvalXml);
  const auto gold = write_temp("punnet_semeval_det.gold", "hom_1\t1\nhom_2\t0\n");
  auto examples = adapt_semeval(xml, gold, SemEvalSubtask::Auto);  // auto-detects detection
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].label == 1);
  CHECK(examples[0].pun_index == std::nullopt);
  CHECK(examples[1].label == 0);
  std::remove(xml.c_str());
  std::remove(gold.c_str());
}

TEST_CASE("semeval auto-detect picks location for word-id gold", "[data]") {
  const auto xml = write_temp("punnet_semeval3.xml", kSemEvalXml);
  const auto gold = write_temp("punnet_semeval_loc2.gold", "hom_1\thom_1_2\nhom_2\thom_2_1\n");
  auto examples = adapt_semeval(xml, gold);
  CHECK(examples[0].pun_index == 1);
  std::remove(xml.c_str());
  std::remove(gold.c_str());
}

TEST_CASE("semeval gold ids missing from the xml are consistency errors", "[data]") {
  const auto xml = write_temp("punnet_semeval4.xml", kSemEvalXml);
  const auto gold = write_temp("punnet_semeval_bad.gold", "hom_9\t1\n");
  CHECK_THROWS_AS(adapt_semeval(xml, gold, SemEvalSubtask::Detection), FormatError);
  std::remove(xml.c_str());
  std::remove(gold.c_str());
}

TEST_CASE("semeval xml entities are unescaped", "[data]") {
  const auto xml = write_temp("punnet_semeval5.xml",
                              "<corpus><text id=\"t_1\"><word id=\"t_1_1\">Tom&amp;Jerry</word>"
                              "<word id=\"t_1_2\">isn&apos;t</word></text></corpus>");
  const auto gold = write_temp("punnet_semeval5.gold", "t_1\t1\n");
  auto examples = adapt_semeval(xml, gold, SemEvalSubtask::Detection);
  CHECK(examples[0].tokens == std::vector<std::string>{"Tom&Jerry", "isn't"});
  std::remove(xml.c_str());
  std::remove(gold.c_str());
}

TEST_CASE("ptd adapter reads two-column files", "[data]") {
  const auto path = write_temp("punnet_ptd.txt",
                               "label,text\n"
                               "1,the boating store had its best sail ever\n"
                               "\n"
                               "0,nothing to see here\n");
  auto examples = adapt_ptd(path);
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].id == "ptd_1");
  CHECK(examples[0].label == 1);
  CHECK(examples[0].tokens.size() == 8);
  CHECK(examples[0].pun_index == std::nullopt);
  CHECK(examples[1].label == 0);
  std::remove(path.c_str());
}

TEST_CASE("ptd adapter accepts tab delimiters and rejects bad labels", "[data]") {
  const auto ok = write_temp("punnet_ptd2.txt", "1\tfunny sentence here\n");
  CHECK(adapt_ptd(ok).size() == 1);
  std::remove(ok.c_str());
  const auto bad = write_temp("punnet_ptd3.txt", "1,fine\n2,broken\n");
  CHECK_THROWS_AS(adapt_ptd(bad), FormatError);
  std::remove(bad.c_str());
}

TEST_CASE("fold plan partitions the dataset", "[data]") {
  auto plan = make_folds(100, 10, 7);
  REQUIRE(plan.folds.size() == 10);
  std::set<std::size_t> seen;
  for (const auto& fold : plan.folds) {
    CHECK(fold.test.size() == 10);
    for (std::size_t i : fold.test) CHECK(seen.insert(i).second);  // disjoint
    CHECK(fold.dev.size() == 9);   // 10% of the 90 training instances
    CHECK(fold.train.size() == 81);
    // train/dev/test of one fold cover everything exactly once
    std::set<std::size_t> fold_all(fold.test.begin(), fold.test.end());
    for (std::size_t i : fold.dev) CHECK(fold_all.insert(i).second);
    for (std::size_t i : fold.train) CHECK(fold_all.insert(i).second);
    CHECK(fold_all.size() == 100);
  }
  CHECK(seen.size() == 100);  // union of test folds = dataset
}

TEST_CASE("fold sizes differ by at most one", "[data]") {
  auto plan = make_folds(103, 10, 3);
  std::size_t lo = 1000, hi = 0;
  for (const auto& fold : plan.folds) {
    lo = std::min(lo, fold.test.size());
    hi = std::max(hi, fold.test.size());
  }
  CHECK(hi - lo <= 1);
}

TEST_CASE("fold plans are deterministic in the seed", "[data]") {
  auto a = make_folds(50, 10, 11);
  auto b = make_folds(50, 10, 11);
  for (std::size_t f = 0; f < 10; ++f) {
    CHECK(a.folds[f].test == b.folds[f].test);
    CHECK(a.folds[f].dev == b.folds[f].dev);
    CHECK(a.folds[f].train == b.folds[f].train);
  }
  auto c = make_folds(50, 10, 12);
  bool any_diff = false;
  for (std::size_t f = 0; f < 10; ++f) any_diff = any_diff || a.folds[f].test != c.folds[f].test;
  CHECK(any_diff);
}
