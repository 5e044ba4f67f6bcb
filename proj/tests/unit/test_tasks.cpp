#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "madrl/metrics.hpp"
#include "madrl/tasks.hpp"
#include "madrl/vocabulary.hpp"

using namespace madrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("madrl_tasks_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_lines(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_SUITE("tasks") {
  TEST_CASE("reserved ids are fixed") {
    Vocabulary v;
    CHECK(v.size() == 4);
    CHECK(v.id("<pad>") == kPadId);
    CHECK(v.id("<s>") == kBosId);
    CHECK(v.id("</s>") == kEosId);
    CHECK(v.id("<unk>") == kUnkId);
    CHECK(v.id("nope") == kUnkId);
    CHECK_THROWS(Vocabulary::from_tokens({"a", "a"}));
    CHECK_THROWS(Vocabulary::from_tokens({"</s>"}));
  }

  TEST_CASE("encode and decode round trip") {
    const auto v = Vocabulary::from_tokens({"the", "cat", "sat"});
    const auto ids = v.encode("the cat  sat the");
    CHECK(ids == TokenSeq{4, 5, 6, 4});
    CHECK(v.decode(ids) == "the cat sat the");
    auto with_eos = ids;
    with_eos.push_back(kEosId);
    CHECK(v.decode(with_eos) == "the cat sat the");
    CHECK(v.encode("the dog") == TokenSeq{4, kUnkId});
  }

  TEST_CASE("vocabulary file round trip") {
    const auto dir = scratch_dir("vocab");
    const auto v = Vocabulary::from_tokens({"x", "y", "z"});
    v.save(dir / "v.txt");
    CHECK(Vocabulary::load(dir / "v.txt") == v);
  }

  TEST_CASE("build vocabulary ranks by frequency") {
    const auto dir = scratch_dir("build");
    write_lines(dir / "a.txt", "b a a\nc a b\n");
    const auto v = build_vocab({dir / "a.txt"}, 100);
    CHECK(v.token(4) == "a");
    CHECK(v.token(5) == "b");
    CHECK(v.token(6) == "c");
    const auto one = build_vocab({dir / "a.txt"}, 1);
    CHECK(one.size() == 5);
    CHECK(one.token(4) == "a");
    // Ties break by first appearance.
    write_lines(dir / "t.txt", "q p p q\n");
    CHECK(build_vocab({dir / "t.txt"}, 10).token(4) == "q");
  }

  TEST_CASE("load corpus") {
    const auto dir = scratch_dir("load");
    const auto v = Vocabulary::from_tokens({"a", "b", "c"});
    write_lines(dir / "s.txt", "a b\nb c\nc\n");
    write_lines(dir / "t.txt", "b a\nc b\nc zz\n");
    const auto pairs = load_corpus(dir / "s.txt", dir / "t.txt", v);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[2].target == TokenSeq{6, kUnkId});

    write_lines(dir / "t4.txt", "a\nb\nc\na\n");
    try {
      load_corpus(dir / "s.txt", dir / "t4.txt", v);
      FAIL("expected a line-count error");
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      CHECK(msg.find('3') != std::string::npos);
      CHECK(msg.find('4') != std::string::npos);
    }

    write_lines(dir / "bad.txt", "a\nb \xff\nc\n");
    try {
      load_corpus(dir / "s.txt", dir / "bad.txt", v);
      FAIL("expected a UTF-8 error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find('2') != std::string::npos);
    }

    write_corpus(pairs, v, dir / "s2.txt", dir / "t2.txt");
    const auto back = load_corpus(dir / "s2.txt", dir / "t2.txt", v);
    CHECK(back == pairs);
  }

  TEST_CASE("synthetic tasks") {
    SyntheticTaskSpec spec;
    spec.train_size = 2000;
    spec.dev_size = 200;
    spec.test_size = 200;

    SUBCASE("copy") {
      spec.kind = SyntheticKind::kCopy;
      for (const auto& p : generate_synthetic(spec).train) CHECK(p.target == p.source);
    }
    SUBCASE("cipher is invertible") {
      spec.kind = SyntheticKind::kCipher;
      const auto perm = cipher_permutation(spec);
      std::set<TokenId> image(perm.begin(), perm.end());
      CHECK(image.size() == perm.size());
      std::vector<TokenId> inverse(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i] - kNumReserved)] = static_cast<TokenId>(i + kNumReserved);
      for (const auto& p : generate_synthetic(spec).train) {
        TokenSeq back = p.target;
        for (auto& t : back) t = inverse[static_cast<std::size_t>(t - kNumReserved)];
        CHECK(back == p.source);
      }
    }
    SUBCASE("cipher-reverse structure and disjoint splits") {
      const auto corpus = generate_synthetic(spec);
      CHECK(corpus.train.size() == 2000);
      CHECK(corpus.dev.size() == 200);
      std::set<TokenSeq> train_src;
      for (const auto& p : corpus.train) {
        CHECK(p.source.size() >= 5);
        CHECK(p.source.size() <= 20);
        CHECK(p.target.size() == p.source.size());
        train_src.insert(p.source);
      }
      for (const auto& p : corpus.dev) CHECK(train_src.count(p.source) == 0);
      for (const auto& p : corpus.test) CHECK(train_src.count(p.source) == 0);
      const auto vocab = synthetic_vocabulary(spec);
      CHECK(vocab.size() == 54);
      for (const auto& p : corpus.test) {
        const auto out = oracle_translate(spec, p.source);
        CHECK(out == p.target);
        CHECK(sentence_bleu(out, p.target) == doctest::Approx(100.0));
        CHECK(vocab.encode(vocab.decode(p.source)) == p.source);
      }
    }
    SUBCASE("deterministic") {
      CHECK(generate_synthetic(spec) == generate_synthetic(spec));
      auto other = spec;
      other.seed = 2;
      CHECK_FALSE(generate_synthetic(other) == generate_synthetic(spec));
    }
    SUBCASE("empty length range") {
      spec.min_length = 6;
      spec.max_length = 5;
      CHECK_THROWS(generate_synthetic(spec));
    }
  }

  TEST_CASE("training pair sampling") {
    ParallelCorpus one;
    one.train = {{{4, 5}, {5, 4}}};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) CHECK(&sample_training_pair(one, rng) == &one.train[0]);

    ParallelCorpus ten;
    for (int i = 0; i < 10; ++i) ten.train.push_back({{4 + i}, {4 + i}});
    std::vector<int> counts(10, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(&sample_training_pair(ten, rng) - ten.train.data())];
    const double expected = draws / 10.0;
    const double sigma = std::sqrt(draws * 0.1 * 0.9);
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);

    std::mt19937_64 a(1), b(2);
    int same = 0;
    for (int i = 0; i < 50; ++i) same += &sample_training_pair(ten, a) == &sample_training_pair(ten, b);
    CHECK(same < 50);
  }
}
