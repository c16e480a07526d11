#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "decipher/evaluate.hpp"
#include "test_support.hpp"

using namespace decipher;
using namespace test_support;

TEST_CASE("EM lexicon extraction takes the per-source argmax") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a", "b"});
  TranslationTable t = em_init(vf, ve);
  t.at(0, 0) = 0.9;  // p(x|a)
  t.at(0, 1) = 0.1;
  t.at(1, 0) = 0.2;
  t.at(1, 1) = 0.8;  // p(y|b)
  const Lexicon lex = extract_lexicon(t, vf, ve);
  REQUIRE(lex.entries.size() == 2);
  CHECK(lex.entries[0] == std::pair<std::string, std::string>{"x", "a"});
  CHECK(lex.entries[1] == std::pair<std::string, std::string>{"y", "b"});
}

TEST_CASE("log-linear lexicon: all-zero weights tie-break to target id 0") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"bb", "aa"});
  const FeatureSpace fs(vf, ve, false, 0.3);
  const Lexicon lex = extract_lexicon(WeightVector{}, fs);
  for (const auto& [f, e] : lex.entries) CHECK(e == "bb");  // id 0
}

TEST_CASE("seeded orthographic weights map cognates correctly") {
  const Vocab vf = make_vocab({"minuto", "zzz"});
  const Vocab ve = make_vocab({"stone", "minute"});
  const FeatureSpace fs(vf, ve, true, 0.3);
  const WeightVector w = init_weights(fs, InitConfig{});
  const Lexicon lex = extract_lexicon(w, fs);
  const auto it = std::find_if(lex.entries.begin(), lex.entries.end(),
                               [](const auto& p) { return p.first == "minuto"; });
  REQUIRE(it != lex.entries.end());
  CHECK(it->second == "minute");
}

TEST_CASE("accuracy arithmetic") {
  GoldLexicon gold;
  gold.map = {{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}};

  Lexicon perfect{{{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}}};
  CHECK(accuracy(perfect, gold) == doctest::Approx(100.0));

  Lexicon disjoint{{{"a", "9"}, {"b", "9"}, {"c", "9"}, {"d", "9"}}};
  CHECK(accuracy(disjoint, gold) == doctest::Approx(0.0));

  Lexicon quarter{{{"a", "1"}, {"b", "9"}, {"c", "9"}, {"d", "9"}}};
  CHECK(accuracy(quarter, gold) == doctest::Approx(25.0));
}

TEST_CASE("accuracy reports missing gold coverage and honors the ignore set") {
  GoldLexicon gold;
  gold.map = {{"a", "1"}};
  Lexicon lex{{{"a", "1"}, {"mystery", "2"}}};
  CHECK_THROWS_WITH_AS(accuracy(lex, gold), doctest::Contains("mystery"), CoverageError);
  CHECK(accuracy(lex, gold, {"mystery"}) == doctest::Approx(100.0));
}

TEST_CASE("accuracy is invariant under consistent relabeling") {
  GoldLexicon gold;
  gold.map = {{"a", "1"}, {"b", "2"}};
  Lexicon lex{{{"a", "1"}, {"b", "9"}}};
  const double before = accuracy(lex, gold);

  GoldLexicon gold2;
  gold2.map = {{"A", "I"}, {"B", "II"}};
  Lexicon lex2{{{"A", "I"}, {"B", "IX"}}};
  CHECK(accuracy(lex2, gold2) == doctest::Approx(before));
}

TEST_CASE("viterbi: length-1 sentence takes emission times start marginal") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b"});
  // LM heavily favors bigrams starting with b
  const BigramLM lm = train_bigram_lm(make_table({{1, 0, 9}, {0, 1, 1}}), ve, 0.1);
  TranslationTable t = em_init(vf, ve);
  t.at(0, 0) = 1.0;
  t.at(1, 0) = 1.0;  // emissions equal: the marginal must decide
  const auto out = viterbi_decode({"x"}, em_log_emission(t), vf, lm);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "b");
}

TEST_CASE("viterbi: point-mass LM dictates the path when emissions are positive") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a", "b"});
  const BigramLM lm = train_bigram_lm(make_table({{0, 1, 1}}), ve, 0.0);
  TranslationTable t = em_init(vf, ve);  // uniform, strictly positive
  const auto out = viterbi_decode({"y", "x"}, em_log_emission(t), vf, lm);
  CHECK(out == std::vector<std::string>{"a", "b"});
}

TEST_CASE("viterbi: OOV source token is an error") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a"});
  const BigramLM lm = train_bigram_lm(make_table({{0, 0, 1}}), ve, 0.1);
  TranslationTable t = em_init(vf, ve);
  CHECK_THROWS_AS(viterbi_decode({"unknown"}, em_log_emission(t), vf, lm), Error);
}

TEST_CASE("viterbi path beats single-swap perturbations") {
  Rng rng(5);
  const std::uint32_t vs = 5;
  Vocab vf, ve;
  for (std::uint32_t i = 0; i < vs; ++i) {
    vf.add("f" + std::to_string(i));
    ve.add("e" + std::to_string(i));
  }
  BigramTable t;
  for (int i = 0; i < 12; ++i) t.counts[pack_pair(rng.below(vs), rng.below(vs))] += 1 + rng.below(3);
  for (const auto& [_, c] : t.counts) t.total += c;
  const BigramLM lm = train_bigram_lm(t, ve, 0.2);

  TranslationTable table = em_init(vf, ve);
  for (WordId e = 0; e < vs; ++e) {
    double row = 0.0;
    for (WordId f = 0; f < vs; ++f) {
      table.at(e, f) = 0.05 + rng.uniform();
      row += table.at(e, f);
    }
    for (WordId f = 0; f < vs; ++f) table.at(e, f) /= row;
  }

  const std::vector<std::string> sentence = {"f0", "f3", "f1", "f4"};
  const auto path = viterbi_decode(sentence, em_log_emission(table), vf, lm);

  // independent path scorer over target ids
  auto path_score = [&](const std::vector<WordId>& es) {
    double s = std::log(lm.marginal_first(es[0])) + std::log(table.at(es[0], 0));
    const std::vector<WordId> fids = {0, 3, 1, 4};
    for (std::size_t i = 1; i < es.size(); ++i)
      s += std::log(lm.cond_second(es[i - 1], es[i])) + std::log(table.at(es[i], fids[i]));
    return s;
  };
  std::vector<WordId> best_ids;
  for (const auto& w : path) best_ids.push_back(*ve.id(w));
  const double best = path_score(best_ids);
  for (std::size_t pos = 0; pos < best_ids.size(); ++pos)
    for (WordId e = 0; e < vs; ++e) {
      std::vector<WordId> perturbed = best_ids;
      perturbed[pos] = e;
      CHECK(path_score(perturbed) <= best + 1e-12);
    }
}

TEST_CASE("bleu: identity scores 100 even for very short sentences") {
  const std::vector<std::vector<std::string>> h = {{"a", "b", "c"}, {"d"}};
  CHECK(bleu(h, h) == doctest::Approx(100.0));
  const std::vector<std::vector<std::string>> single = {{"x"}};
  CHECK(bleu(single, single) == doctest::Approx(100.0));  // order capped at 1
}

TEST_CASE("bleu: zero unigram overlap scores 0") {
  CHECK(bleu({{"a", "b"}}, {{"c", "d"}}) == doctest::Approx(0.0));
}

TEST_CASE("bleu: hand-computed brevity penalty example") {
  const double score = bleu({{"a", "b", "c", "d"}}, {{"a", "b", "c", "d", "e"}});
  CHECK(score == doctest::Approx(100.0 * std::exp(1.0 - 5.0 / 4.0)).epsilon(1e-6));
  CHECK(score == doctest::Approx(77.8800783).epsilon(1e-4));
}

TEST_CASE("bleu is permutation-sensitive") {
  const double in_order = bleu({{"a", "b", "c", "d", "e"}}, {{"a", "b", "c", "d", "e"}});
  const double shuffled = bleu({{"b", "a", "d", "c", "e"}}, {{"a", "b", "c", "d", "e"}});
  CHECK(in_order == doctest::Approx(100.0));
  CHECK(shuffled < in_order);
}

TEST_CASE("bleu argument errors") {
  CHECK_THROWS_AS(bleu({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(bleu({{"a"}}, {{"a"}, {"b"}}), std::invalid_argument);
}

TEST_CASE("lexicon and gold TSV round-trips") {
  Lexicon lex{{{"b", "2"}, {"a", "1"}}};
  std::stringstream buf;
  save_lexicon_tsv(buf, lex);
  const Lexicon loaded = load_lexicon_tsv(buf);
  REQUIRE(loaded.entries.size() == 2);
  CHECK(loaded.entries[0].first == "a");  // sorted on load

  GoldLexicon gold;
  gold.map = {{"x", "ex"}, {"y", "wye"}};
  std::stringstream gbuf;
  save_gold_tsv(gbuf, gold);
  const GoldLexicon gloaded = load_gold_tsv(gbuf);
  CHECK(gloaded.map == gold.map);
}
