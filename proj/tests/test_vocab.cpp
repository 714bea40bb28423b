#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mglm/vocab.hpp"

using namespace mglm;

TEST_CASE("build_vocab frequency ordering and reserved ids") {
  Vocabulary v = Vocabulary::build({"a b", "b c"});
  // b occurs twice -> first corpus id.
  CHECK(v.token_to_id.at("b") == 4);
  CHECK(v.token_to_id.at("a") == 5);
  CHECK(v.token_to_id.at("c") == 6);
  CHECK(v.size() == 7);

  Vocabulary single = Vocabulary::build({"x"});
  CHECK(single.size() == 5);

  CHECK_THROWS_AS(Vocabulary::build({}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary::build({"   "}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary::build({"hello [SEP] world"}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary::build({"PAD token"}), std::invalid_argument);
}

TEST_CASE("encode and decode") {
  Vocabulary v = Vocabulary::build({"a b", "b c"});
  CHECK(v.encode("") == std::vector<int>{});
  CHECK(v.encode("b a") == std::vector<int>{4, 5});
  CHECK(v.encode("zzz") == std::vector<int>{1});

  CHECK(v.decode_ids({}) == "");
  CHECK(v.decode_ids(v.encode("a b c")) == "a b c");
  CHECK(v.decode_ids({2}) == "[SEP]");
  CHECK(v.decode_ids({3}) == "[EOS_SLOT]");
  CHECK_THROWS_AS(v.decode_ids({v.size()}), std::invalid_argument);
}

TEST_CASE("encode/decode round trip for UNK-free strings") {
  Vocabulary v = Vocabulary::build({"red green blue", "green blue cyan"});
  for (const std::string s : {"red", "cyan blue", "green green red blue"}) {
    std::vector<int> ids = v.encode(s);
    CHECK(v.decode_ids(ids) == s);
    CHECK(v.encode(v.decode_ids(ids)) == ids);
  }
}

TEST_CASE("vocabulary construction is deterministic") {
  std::vector<std::string> corpus = {"t4 t2 t2", "t1 t4 t4 t3", "t3 t1"};
  Vocabulary a = Vocabulary::build(corpus);
  Vocabulary b = Vocabulary::build(corpus);
  CHECK(a.id_to_token == b.id_to_token);
}

TEST_CASE("vocab file round trip and reserved line validation") {
  std::string path = (std::filesystem::temp_directory_path() / "mglm_vocab_test.txt").string();
  Vocabulary v = Vocabulary::build({"one two", "two three"});
  v.save(path);
  Vocabulary loaded = Vocabulary::load(path);
  CHECK(loaded.id_to_token == v.id_to_token);

  // Tampered reserved line must be rejected.
  {
    std::ofstream f(path, std::ios::binary);
    f << "PAD\nUNK\nSEP\n[EOS_SLOT]\nword\n";
  }
  CHECK_THROWS_AS(Vocabulary::load(path), std::runtime_error);
  std::remove(path.c_str());
}
