#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "punnet/encoder.hpp"
#include "punnet/gradcheck.hpp"
#include "punnet/vocab.hpp"

using namespace punnet;

namespace {

ToyTransformerConfig small_config(std::size_t vocab_size) {
  ToyTransformerConfig c;
  c.layers = 2;
  c.heads = 2;
  c.d_model = 8;
  c.max_len = 16;
  c.vocab_size = vocab_size;
  return c;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("vocabulary of empty corpus is just UNK", "[encoder]") {
  auto v = Vocabulary::build({}, 1);
  CHECK(v.size() == 1);
  CHECK(v.id("anything") == Vocabulary::kUnkId);
}

TEST_CASE("vocabulary keeps all words at min_count 1", "[encoder]") {
  auto v = Vocabulary::build({{"b", "a"}, {"b"}}, 1);
  CHECK(v.size() == 3);
  CHECK(v.id("b") == 1);  // most frequent first
  CHECK(v.id("a") == 2);
  CHECK(v.id("B") == 1);  // lowercased keys
}

TEST_CASE("vocabulary breaks frequency ties alphabetically", "[encoder]") {
  auto v = Vocabulary::build({{"pear", "apple", "mango"}}, 1);
  CHECK(v.id("apple") == 1);
  CHECK(v.id("mango") == 2);
  CHECK(v.id("pear") == 3);
}

TEST_CASE("vocabulary min_count filters rare words", "[encoder]") {
  auto v = Vocabulary::build({{"a", "a", "b"}}, 2);
  CHECK(v.id("a") == 1);
  CHECK(v.id("b") == Vocabulary::kUnkId);
}

TEST_CASE("toy encoder output shapes and determinism", "[encoder]") {
  Rng rng = seeded_rng(3);
  ToyTransformer<double> enc(small_config(10), rng);
  auto a = enc.encode({1, 2, 3});
  CHECK(a.cls.shape() == Shape{8});
  CHECK(a.tokens.shape() == Shape{3, 8});
  auto b = enc.encode({1, 2, 3});
  CHECK(a.cls.value() == b.cls.value());
  CHECK(a.tokens.value() == b.tokens.value());

  auto single = enc.encode({4});
  CHECK(single.tokens.shape() == Shape{1, 8});
}

TEST_CASE("changing one token changes some encoder rows", "[encoder]") {
  Rng rng = seeded_rng(4);
  ToyTransformer<double> enc(small_config(10), rng);
  auto a = enc.encode({1, 2, 3, 4});
  auto b = enc.encode({1, 2, 5, 4});
  CHECK(a.tokens.value() != b.tokens.value());
}

TEST_CASE("token permutation changes position-dependent outputs", "[encoder]") {
  Rng rng = seeded_rng(5);
  ToyTransformer<double> enc(small_config(10), rng);
  auto a = enc.encode({1, 2, 3});
  auto b = enc.encode({3, 2, 1});
  CHECK(a.tokens.value() != b.tokens.value());
}

TEST_CASE("sentences beyond max_len are rejected", "[encoder]") {
  Rng rng = seeded_rng(6);
  auto cfg = small_config(10);
  cfg.max_len = 4;
  ToyTransformer<double> enc(cfg, rng);
  CHECK_NOTHROW(enc.encode({1, 2, 3}));
  CHECK_THROWS_AS(enc.encode({1, 2, 3, 4}), ArgumentError);
}

TEST_CASE("d_model must divide into heads", "[encoder]") {
  Rng rng = seeded_rng(6);
  auto cfg = small_config(10);
  cfg.d_model = 9;
  CHECK_THROWS_AS(ToyTransformer<double>(cfg, rng), ArgumentError);
}

TEST_CASE("per-head attention rows sum to one", "[encoder][property]") {
  Rng rng = seeded_rng(7);
  ToyTransformer<double> enc(small_config(10), rng);
  std::vector<Tensor<double>> attn;
  enc.encode({1, 2, 3, 4, 5}, &attn);
  REQUIRE(attn.size() == 4);  // 2 layers x 2 heads
  for (const auto& a : attn) {
    REQUIRE(a.shape() == (Shape{6, 6}));
    for (std::size_t i = 0; i < 6; ++i) {
      double sum = 0;
      for (std::size_t j = 0; j < 6; ++j) sum += a.value()[i * 6 + j];
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("full toy encoder gradient matches finite differences", "[encoder][grad]") {
  Rng rng = seeded_rng(8);
  auto cfg = small_config(6);
  cfg.layers = 1;
  ToyTransformer<double> enc(cfg, rng);
  Rng wrng = seeded_rng(50);
  Tensor<double> w_cls = init_uniform<double>({8}, 1.0, wrng, false);
  Tensor<double> w_tok = init_uniform<double>({3, 8}, 1.0, wrng, false);
  auto forward = [&] {
    auto out = enc.encode({1, 2, 3});
    return add(sum_all(mul(out.cls, w_cls)), sum_all(mul(out.tokens, w_tok)));
  };
  auto report = grad_check<double>(enc.parameters(), forward);
  CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("precomputed embeddings round-trip through the file", "[encoder]") {
  const std::string path = temp_path("punnet_pcemb_roundtrip.bin");
  std::vector<PrecomputedRecord> records;
  PrecomputedRecord rec;
  rec.id = "ex_1";
  rec.n_tokens = 2;
  rec.dim = 3;
  rec.data = {0.5f, -1.25f, 3.0f, 1.0f, 2.0f, -0.125f, 4.5f, 0.0f, -2.0f};
  records.push_back(rec);
  write_precomputed_embeddings(path, records);

  auto enc = PrecomputedEncoder<float>::load(path);
  CHECK(enc.dim() == 3);
  auto out = enc.encode("ex_1", 2);
  CHECK(out.cls.value() == std::vector<float>{0.5f, -1.25f, 3.0f});
  CHECK(out.tokens.value() ==
        std::vector<float>{1.0f, 2.0f, -0.125f, 4.5f, 0.0f, -2.0f});
  std::remove(path.c_str());
}

TEST_CASE("precomputed encoder rejects unknown ids and bad token counts", "[encoder]") {
  const std::string path = temp_path("punnet_pcemb_errors.bin");
  PrecomputedRecord rec;
  rec.id = "ex_1";
  rec.n_tokens = 2;
  rec.dim = 2;
  rec.data = {1, 2, 3, 4, 5, 6};
  write_precomputed_embeddings(path, {rec});
  auto enc = PrecomputedEncoder<float>::load(path);
  CHECK_THROWS_AS(enc.encode("nope", 2), LookupError);
  CHECK_THROWS_AS(enc.encode("ex_1", 3), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("truncated embedding files are format errors", "[encoder]") {
  const std::string path = temp_path("punnet_pcemb_trunc.bin");
  PrecomputedRecord rec;
  rec.id = "ex_1";
  rec.n_tokens = 2;
  rec.dim = 2;
  rec.data = {1, 2, 3, 4, 5, 6};
  write_precomputed_embeddings(path, {rec});
  // Chop the tail off.
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
  }
  CHECK_THROWS_AS(PrecomputedEncoder<float>::load(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("bad magic bytes are rejected", "[encoder]") {
  const std::string path = temp_path("punnet_pcemb_magic.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out.write("NOTEMB1\n", 8);
  }
  CHECK_THROWS_AS(PrecomputedEncoder<float>::load(path), FormatError);
  std::remove(path.c_str());
}
