#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mglm/corpus.hpp"
#include "mglm/rng.hpp"
#include "mglm/vocab.hpp"

using namespace mglm;

namespace {

CorpusSpec small_spec() {
  CorpusSpec spec = CorpusSpec::defaults(3);
  spec.lexicon_size = 10;
  spec.min_len = 2;
  spec.max_len = 5;
  spec.seed = 42;
  spec.n_examples = 20;
  return spec;
}

}  // namespace

TEST_CASE("gen_corpus is a pure function of the spec") {
  CorpusSpec spec = small_spec();
  spec.n_examples = 3;
  auto a = gen_corpus(spec);
  auto b = gen_corpus(spec);
  REQUIRE(a.size() == 3);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].channels == b[i].channels);

  spec.seed = 43;
  auto c = gen_corpus(spec);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) any_diff = any_diff || a[i].channels != c[i].channels;
  CHECK(any_diff);
}

TEST_CASE("gen_corpus validates its spec") {
  CorpusSpec spec = small_spec();
  spec.lexicon_size = 1;
  CHECK_THROWS_AS(gen_corpus(spec), std::invalid_argument);
  spec = small_spec();
  spec.transforms[0] = TransformKind::DictMap;
  CHECK_THROWS_AS(gen_corpus(spec), std::invalid_argument);
  spec = small_spec();
  spec.min_len = 0;
  CHECK_THROWS_AS(gen_corpus(spec), std::invalid_argument);
}

TEST_CASE("transform constructions by hand") {
  CorpusSpec spec = small_spec();
  // channel 1 = reverse(dict): "a3 a7" -> "b7 b3"
  CHECK(oracle_translate({"a3", "a7"}, 0, 1, spec) == std::vector<std::string>{"b7", "b3"});
  // channel 2 = rot-left(dict): "a1 a2 a3" -> "c2 c3 c1"
  CHECK(oracle_translate({"a1", "a2", "a3"}, 0, 2, spec) == std::vector<std::string>{"c2", "c3", "c1"});
  // identity direction
  CHECK(oracle_translate({"a5", "a1"}, 0, 0, spec) == std::vector<std::string>{"a5", "a1"});
}

TEST_CASE("oracle round trips over random sequences") {
  CorpusSpec spec = small_spec();
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    int from = static_cast<int>(rng.next_below(3));
    int to = static_cast<int>(rng.next_below(3));
    int len = 1 + static_cast<int>(rng.next_below(6));
    std::vector<std::string> toks;
    for (int i = 0; i < len; ++i)
      toks.push_back(lexicon_word(from, static_cast<int>(rng.next_below(10))));
    auto there = oracle_translate(toks, from, to, spec);
    auto back = oracle_translate(there, to, from, spec);
    CHECK(back == toks);
  }
}

TEST_CASE("every generated example is oracle-consistent across all pairs") {
  CorpusSpec spec = small_spec();
  auto corpus = gen_corpus(spec);
  for (const ParallelExample& ex : corpus) {
    for (int a = 0; a < spec.k; ++a) {
      for (int b = 0; b < spec.k; ++b) {
        auto got = oracle_translate(split_ws(ex.channels[static_cast<size_t>(a)]), a, b, spec);
        CHECK(got == split_ws(ex.channels[static_cast<size_t>(b)]));
      }
    }
  }
}

TEST_CASE("per-channel lexicons are disjoint surface strings") {
  for (int c1 = 0; c1 < 3; ++c1)
    for (int c2 = c1 + 1; c2 < 3; ++c2)
      for (int i = 0; i < 10; ++i) CHECK(lexicon_word(c1, i) != lexicon_word(c2, i));
}

TEST_CASE("oracle rejects out-of-lexicon tokens; lenient mode counts them") {
  CorpusSpec spec = small_spec();
  CHECK_THROWS_AS(oracle_translate({"zzz"}, 0, 1, spec), std::invalid_argument);
  CHECK_THROWS_AS(oracle_translate({"b1"}, 0, 1, spec), std::invalid_argument);  // wrong channel
  long oov = 0;
  auto out = oracle_translate_lenient({"a1", "zzz"}, 0, 1, spec, &oov);
  CHECK(oov == 1);
  REQUIRE(out.size() == 2);
  // reverse transform puts the mismatch marker first
  CHECK(out[0] == "<oov>");
  CHECK(out[1] == "b1");
}

TEST_CASE("length distribution sanity on a larger draw") {
  CorpusSpec spec = CorpusSpec::defaults(3);
  spec.lexicon_size = 50;
  spec.min_len = 3;
  spec.max_len = 12;
  spec.seed = 42;
  spec.n_examples = 5000;
  auto corpus = gen_corpus(spec);
  double mean = 0.0;
  for (const ParallelExample& ex : corpus) {
    size_t len = split_ws(ex.channels[0]).size();
    REQUIRE(len >= 3);
    REQUIRE(len <= 12);
    mean += static_cast<double>(len);
  }
  mean /= static_cast<double>(corpus.size());
  CHECK(mean == doctest::Approx(7.5).epsilon(0.2 / 7.5));
}

TEST_CASE("corpus TSV round trip and parse errors") {
  std::string path = (std::filesystem::temp_directory_path() / "mglm_corpus_test.tsv").string();
  CorpusSpec spec = small_spec();
  auto corpus = gen_corpus(spec);
  save_corpus(path, corpus);
  auto loaded = load_corpus(path, spec.k);
  REQUIRE(loaded.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) CHECK(loaded[i].channels == corpus[i].channels);

  {
    std::ofstream f(path, std::ios::binary);
    f << "a b\tc d\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(path, 3), doctest::Contains("line 1"), std::runtime_error);

  {
    std::ofstream f(path, std::ios::binary);
  }
  CHECK(load_corpus(path, 3).empty());
  std::remove(path.c_str());
}
