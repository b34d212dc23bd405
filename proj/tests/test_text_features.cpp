#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adfuse/io_util.hpp"
#include "adfuse/text_features.hpp"
#include "test_util.hpp"
#include "tfidf_oracle.hpp"

using namespace adfuse;
using adfuse::testing::fixture;

namespace {

TranscriptionRecord record_of(std::string id, std::initializer_list<const char*> tokens,
                              double conf = 1.0) {
  TranscriptionRecord r{std::move(id), {}};
  for (const char* t : tokens) r.words.push_back({t, conf});
  return r;
}

EmbeddingTable table_of(std::size_t dim,
                        std::initializer_list<std::pair<const char*, std::vector<double>>> rows) {
  EmbeddingTable t(dim);
  for (const auto& [token, values] : rows) {
    t.insert(token, Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                      static_cast<Eigen::Index>(values.size())));
  }
  return t;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Just Do It!") == std::vector<std::string>{"just", "do", "it"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Wi-Fi 5G") == std::vector<std::string>{"wi", "fi", "5g"});
  CHECK(tokenize("--a__b  ") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("fit_tfidf counts presence per record") {
  const auto m = fit_tfidf({record_of("1", {"a", "b"}), record_of("2", {"a"}),
                            record_of("3", {"a", "c"})});
  CHECK(m.doc_count == 3);
  CHECK(m.doc_freq.size() == 3);
  CHECK(m.doc_freq.at("a") == 3);
  CHECK(m.doc_freq.at("b") == 1);
  CHECK(m.doc_freq.at("c") == 1);

  const auto single = fit_tfidf({record_of("1", {"x"})});
  CHECK(single.doc_count == 1);
  CHECK(single.doc_freq.at("x") == 1);

  const auto twice = fit_tfidf({record_of("1", {"a", "a"}), record_of("2", {"a"})});
  CHECK(twice.doc_freq.at("a") == 2);

  CHECK_THROWS_WITH_AS(fit_tfidf({}), "empty corpus", std::invalid_argument);
}

TEST_CASE("select_top_k ranks by tf * ln(N/df)") {
  TfIdfModel m;
  m.doc_count = 3;
  m.doc_freq = {{"a", 3}, {"b", 1}};
  const auto r = record_of("x", {"a", "a", "b"});
  CHECK(select_top_k(r, m, 1) == std::vector<std::string>{"b"});
  CHECK(m.idf("a") == 0.0);
  CHECK(m.idf("b") == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(select_top_k(r, m, 5) == std::vector<std::string>{"b", "a"});

  // Unseen tokens are scored as df = 1.
  CHECK(m.idf("zzz") == doctest::Approx(std::log(3.0)));

  const auto tie = record_of("t", {"q", "p"});
  TfIdfModel flat;
  flat.doc_count = 2;
  flat.doc_freq = {{"p", 1}, {"q", 1}};
  CHECK(select_top_k(tie, flat, 1) == std::vector<std::string>{"p"});

  CHECK(select_top_k(record_of("e", {}), flat, 3).empty());
  CHECK_THROWS_AS(select_top_k(tie, flat, 0), std::invalid_argument);
}

TEST_CASE("select_top_k matches the brute-force scorer on random corpora") {
  SplitMix64 rng(7);
  const char* vocab[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TranscriptionRecord> corpus;
    const auto docs = 1 + rng.below(8);
    for (std::size_t d = 0; d < docs; ++d) {
      TranscriptionRecord r{"doc" + std::to_string(d), {}};
      const auto len = rng.below(10);
      for (std::size_t i = 0; i < len; ++i) r.words.push_back({vocab[rng.below(8)], 1.0});
      corpus.push_back(r);
    }
    const auto model = fit_tfidf(corpus);
    for (const auto& record : corpus) {
      for (std::size_t k = 1; k <= 6; ++k) {
        const auto got = select_top_k(record, model, k);
        CHECK(got == adfuse::testing::brute_force_top_k(record, corpus, k));
        CHECK(got == select_top_k(record, model, k));
      }
    }
    for (const auto& [token, df] : model.doc_freq) {
      CHECK(df >= 1);
      CHECK(df <= model.doc_count);
      CHECK(model.idf(token) >= 0.0);
    }
  }
}

TEST_CASE("aggregate sums embeddings and counts misses") {
  const auto table = table_of(2, {{"a", {1, 2}}, {"b", {3, -1}}});
  auto one = aggregate({"a"}, table);
  CHECK(one.vector == Eigen::Vector2d(1, 2));
  CHECK(one.miss_count == 0);

  CHECK(aggregate({"a", "b"}, table).vector == Eigen::Vector2d(4, 1));

  auto miss = aggregate({"zzz"}, table);
  CHECK(miss.vector == Eigen::Vector2d::Zero());
  CHECK(miss.miss_count == 1);
  CHECK(miss.selected == std::vector<std::string>{"zzz"});

  CHECK_THROWS_AS(aggregate({"a"}, EmbeddingTable(2)), std::invalid_argument);
}

TEST_CASE("aggregate is permutation invariant and additive") {
  SplitMix64 rng(11);
  EmbeddingTable table(5);
  std::vector<std::string> lexicon;
  for (int i = 0; i < 30; ++i) {
    lexicon.push_back("w" + std::to_string(i));
    table.insert(lexicon.back(), adfuse::testing::random_vector(5, rng, 10.0));
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> a;
    std::vector<std::string> b;
    for (auto n = rng.below(12); n > 0; --n) a.push_back(lexicon[rng.below(30)] + (rng.below(5) == 0 ? "x" : ""));
    for (auto n = rng.below(12); n > 0; --n) b.push_back(lexicon[rng.below(30)]);

    auto shuffled = a;
    shuffle(std::span<std::string>(shuffled), rng);
    const auto fa = aggregate(a, table);
    CHECK(aggregate(shuffled, table).vector == fa.vector);

    auto joined = a;
    joined.insert(joined.end(), b.begin(), b.end());
    const auto fj = aggregate(joined, table);
    const auto fb = aggregate(b, table);
    CHECK(adfuse::testing::max_abs_diff(fj.vector, fa.vector + fb.vector) < 1e-12);
    CHECK(fj.miss_count == fa.miss_count + fb.miss_count);
  }
}

TEST_CASE("filter_by_confidence keeps words at or above the threshold") {
  TranscriptionRecord r{"img", {{"hi", 0.9}, {"lo", 0.3}, {"edge", 0.7}}};
  const auto kept = filter_by_confidence(r, 0.7);
  CHECK(kept.words == std::vector<TranscribedWord>{{"hi", 0.9}, {"edge", 0.7}});
  CHECK(filter_by_confidence(r, 0.0) == r);
  CHECK(filter_by_confidence(r, 1.0).words.empty());
  CHECK(filter_by_confidence(kept, 0.7) == kept);
  CHECK_THROWS_AS(filter_by_confidence(r, 1.5), std::invalid_argument);
}

TEST_CASE("normalize_record re-tokenizes words and keeps their confidence") {
  TranscriptionRecord r{"img", {{"Wi-Fi", 0.8}, {"!!", 0.9}, {"Sale", 0.5}}};
  const auto n = normalize_record(r);
  CHECK(n.words == std::vector<TranscribedWord>{{"wi", 0.8}, {"fi", 0.8}, {"sale", 0.5}});
}

TEST_CASE("embedding file parsing") {
  SUBCASE("fixture loads") {
    const auto table = read_embeddings(fixture("embeddings.txt"));
    CHECK(table.dim() == 4);
    CHECK(table.size() == 20);
    REQUIRE(table.find("car") != nullptr);
    CHECK((*table.find("car"))[1] == 0.88);
  }
  SUBCASE("wrong arity names the line") {
    std::istringstream in("2 3\na 1 2 3\nb 1 2\n");
    try {
      read_embeddings(in, "emb.txt");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("emb.txt:3") == 0);
    }
  }
  SUBCASE("bad header, bad number, count mismatch, duplicates") {
    std::istringstream h("3\n");
    CHECK_THROWS_AS(read_embeddings(h), ParseError);
    std::istringstream n("1 2\na 1 x\n");
    CHECK_THROWS_AS(read_embeddings(n), ParseError);
    std::istringstream c("3 2\na 1 2\n");
    CHECK_THROWS_AS(read_embeddings(c), ParseError);
    std::istringstream d("2 1\na 1\na 2\n");
    CHECK_THROWS_AS(read_embeddings(d), ParseError);
  }
  SUBCASE("round trip") {
    const auto table = read_embeddings(fixture("embeddings.txt"));
    std::stringstream buf;
    write_embeddings(buf, table);
    CHECK(read_embeddings(buf) == table);
  }
}

TEST_CASE("transcription file parsing") {
  const auto records = read_transcriptions(fixture("transcriptions.jsonl"));
  CHECK(records.size() == 15);
  CHECK(records.front().image_id == "img01");
  CHECK(records.front().words.front() == TranscribedWord{"Just", 0.95});
  CHECK(records.back().words.empty());

  std::stringstream buf;
  write_transcriptions(buf, records);
  CHECK(read_transcriptions(buf) == records);

  std::istringstream bad_conf(R"({"image_id": "a", "words": [{"token": "x", "conf": 1.5}]})");
  CHECK_THROWS_AS(read_transcriptions(bad_conf), ParseError);
  std::istringstream dup("{\"image_id\": \"a\", \"words\": []}\n{\"image_id\": \"a\", \"words\": []}\n");
  CHECK_THROWS_AS(read_transcriptions(dup), ParseError);
  std::istringstream garbage("{not json\n");
  CHECK_THROWS_AS(read_transcriptions(garbage), ParseError);
}
