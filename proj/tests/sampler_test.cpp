#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "decipher/sampler.hpp"
#include "test_support.hpp"

using namespace decipher;
using namespace test_support;

namespace {

// uniform proposal: empty weights give empty supports everywhere
Proposal uniform_proposal(const FeatureSpace& fs, double pb = 0.1, bool source_side = false) {
  return Proposal::build(WeightVector{}, fs, pb, source_side);
}

}  // namespace

TEST_CASE("proposal: empty support degenerates to uniform") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a", "b", "c", "d"});
  const FeatureSpace fs(vf, ve, false, 0.3);
  const Proposal prop = uniform_proposal(fs);
  for (WordId e = 0; e < 4; ++e) CHECK(prop.density(0, e) == doctest::Approx(0.25));

  Rng rng(3);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40000; ++i) ++counts[prop.sample(0, rng)];
  for (int c : counts) CHECK(std::abs(c / 40000.0 - 0.25) < 0.02);
}

TEST_CASE("proposal: single supported pair takes all q_s mass") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b"});
  const FeatureSpace fs(vf, ve, false, 0.3);
  WeightVector w;
  w.translation[pack_pair(0, 0)] = 2.7;  // any weight
  const Proposal prop = Proposal::build(w, fs, 0.2);
  CHECK(prop.density(0, 0) == doctest::Approx(0.8 * 1.0 + 0.2 * 0.5));
  CHECK(prop.density(0, 1) == doctest::Approx(0.2 * 0.5));
}

TEST_CASE("proposal: softmax of (ln 2, 0) gives 2/3, 1/3") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b", "c"});
  const FeatureSpace fs(vf, ve, false, 0.3);
  WeightVector w;
  w.translation[pack_pair(0, 0)] = std::log(2.0);
  w.translation[pack_pair(0, 1)] = 0.0;
  const double pb = 0.1;
  const Proposal prop = Proposal::build(w, fs, pb);
  CHECK(prop.density(0, 0) == doctest::Approx((1 - pb) * 2.0 / 3.0 + pb / 3.0));
  CHECK(prop.density(0, 1) == doctest::Approx((1 - pb) * 1.0 / 3.0 + pb / 3.0));
  CHECK(prop.density(0, 2) == doctest::Approx(pb / 3.0));
}

TEST_CASE("proposal densities sum to one over the candidate vocab") {
  const TinyInstance inst = make_tiny_instance(19, 4, 5, /*ortho=*/true);
  for (bool source_side : {false, true}) {
    const Proposal prop =
        Proposal::build(inst.model.weights, inst.model.fs, 0.15, source_side);
    const std::uint32_t rows = source_side ? 5 : 4;
    const std::uint32_t cands = source_side ? 4 : 5;
    for (WordId cond = 0; cond < rows; ++cond) {
      double sum = 0.0;
      for (WordId cand = 0; cand < cands; ++cand) sum += prop.density(cond, cand);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gibbs_forced: single-word target vocab pins every sample") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 0, 1}}), ve, 0.0);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  Rng rng(1);
  const auto result = gibbs_forced(m, uniform_proposal(m.fs), 0, 1, 20, rng);
  REQUIRE(result.samples.size() == 20);
  for (const auto& s : result.samples) CHECK((s.first == 0 && s.second == 0));
}

TEST_CASE("gibbs_forced: point-mass posterior locks after the first sweep") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}}), ve, 0.0);  // only (a, b) possible
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  Rng rng(2);
  const auto result = gibbs_forced(m, uniform_proposal(m.fs), 0, 0, 30, rng);
  for (std::size_t i = 1; i < result.samples.size(); ++i) {
    CHECK(result.samples[i].first == 0);
    CHECK(result.samples[i].second == 1);
  }
}

TEST_CASE("gibbs_forced marginal matches exact_posterior (zero weights)") {
  const TinyInstance base = make_tiny_instance(6, 3, 4, /*ortho=*/false);
  LogLinearModel m = base.model;
  m.weights = WeightVector{};
  Rng rng(9);
  const auto result = gibbs_forced(m, uniform_proposal(m.fs), 0, 1, 5000, rng);
  const auto post = exact_posterior(m, 0, 1);

  std::vector<double> marg_exact(4, 0.0), marg_emp(4, 0.0);
  for (WordId e1 = 0; e1 < 4; ++e1)
    for (WordId e2 = 0; e2 < 4; ++e2) marg_exact[e1] += post[e1 * 4 + e2];
  for (const auto& s : result.samples) marg_emp[s.first] += 1.0 / result.samples.size();
  double tv = 0.0;
  for (WordId e = 0; e < 4; ++e) tv += std::abs(marg_exact[e] - marg_emp[e]);
  CHECK(tv * 0.5 < 0.05);
}

TEST_CASE("gibbs_forced joint distribution converges (nonzero weights)") {
  const TinyInstance inst = make_tiny_instance(7, 3, 4, /*ortho=*/true);
  const Proposal prop = Proposal::build(inst.model.weights, inst.model.fs, 0.1);
  Rng rng(11);
  const auto entry = inst.src.sorted().front();
  const auto result = gibbs_forced(inst.model, prop, entry.w1, entry.w2, 5000, rng);
  const auto post = exact_posterior(inst.model, entry.w1, entry.w2);
  CHECK(tv_distance(result.samples, post, 4) < 0.05);
}

TEST_CASE("gibbs_full: zero weights make the source marginal uniform") {
  const TinyInstance base = make_tiny_instance(10, 4, 3, /*ortho=*/false);
  LogLinearModel m = base.model;
  m.weights = WeightVector{};
  Rng rng(13);
  const auto result = gibbs_full(m, uniform_proposal(m.fs), 5000, rng);
  std::vector<double> freq(4, 0.0);
  for (const auto& s : result.source_samples) freq[s.first] += 1.0 / result.source_samples.size();
  double tv = 0.0;
  for (double f : freq) tv += std::abs(f - 0.25);
  CHECK(tv * 0.5 < 0.05);
}

TEST_CASE("gibbs_full: single source word fixes every sample") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}, {1, 0, 2}}), ve, 0.1);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  Rng rng(17);
  const auto result = gibbs_full(m, uniform_proposal(m.fs), 50, rng);
  for (const auto& s : result.source_samples) CHECK((s.first == 0 && s.second == 0));
}

TEST_CASE("gibbs_full feature average approaches the exact full expectation") {
  const TinyInstance inst = make_tiny_instance(15, 3, 3, /*ortho=*/true);
  const Proposal prop = Proposal::build(inst.model.weights, inst.model.fs, 0.1);
  Rng rng(19);
  const auto result = gibbs_full(inst.model, prop, 10000, rng);
  const FeatureVec exact = exact_full_expectation(inst.model);
  CHECK(linf_diff(result.mean_phi, exact) < 0.05);
}

TEST_CASE("imh_posterior: degenerate target gives acceptance rate 1") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 0, 1}}), ve, 0.0);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  Rng rng(23);
  const auto result = imh_posterior(m, uniform_proposal(m.fs), 0, 1, 100, rng);
  CHECK(result.acceptance_rate == doctest::Approx(1.0));
}

TEST_CASE("imh_posterior: flat target with uniform proposal accepts everything") {
  const Vocab vf = make_vocab({"x", "y"});
  const Vocab ve = make_vocab({"a", "b", "c"});
  LogLinearModel m;
  // uniform LM over all 9 pairs, zero weights: target and proposal coincide
  BigramTable t;
  for (WordId a = 0; a < 3; ++a)
    for (WordId b = 0; b < 3; ++b) t.counts[pack_pair(a, b)] = 1;
  t.total = 9;
  m.lm = train_bigram_lm(t, ve, 0.0);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  Rng rng(29);
  const auto result = imh_posterior(m, uniform_proposal(m.fs), 0, 1, 200, rng);
  CHECK(result.acceptance_rate == doctest::Approx(1.0));
}

TEST_CASE("imh_posterior converges to the exact posterior") {
  for (double pb : {0.05, 0.1, 0.5}) {
    const TinyInstance inst = make_tiny_instance(31, 3, 4, /*ortho=*/true, /*lm_k=*/0.5);
    const Proposal prop = Proposal::build(inst.model.weights, inst.model.fs, pb);
    Rng rng(37);
    const auto entry = inst.src.sorted().front();
    const auto result = imh_posterior(inst.model, prop, entry.w1, entry.w2, 20000, rng);
    const auto post = exact_posterior(inst.model, entry.w1, entry.w2);
    CHECK(tv_distance(result.samples, post, 4) < 0.05);
    CHECK(result.acceptance_rate >= 0.01);
    CHECK(result.acceptance_rate <= 1.0);
  }
}

TEST_CASE("imh_posterior: rejected proposals repeat the current state") {
  const TinyInstance inst = make_tiny_instance(41, 3, 4, /*ortho=*/true);
  const Proposal prop = Proposal::build(inst.model.weights, inst.model.fs, 0.1);
  Rng rng(43);
  const auto entry = inst.src.sorted().front();
  const auto result = imh_posterior(inst.model, prop, entry.w1, entry.w2, 500, rng);
  REQUIRE(result.samples.size() == 500);
  int changes = 0;
  for (std::size_t i = 1; i < result.samples.size(); ++i)
    if (result.samples[i] != result.samples[i - 1]) ++changes;
  CHECK(changes <= result.accepted);  // every change needs an acceptance
  CHECK(result.accepted < 500);       // and this chain does reject sometimes
}

TEST_CASE("imh_reconstruction: zero weights reconstruct uniformly") {
  const Vocab vf = make_vocab({"x", "y", "z"});
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}}), ve, 0.1);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  const Proposal prop_src = uniform_proposal(m.fs, 0.1, /*source_side=*/true);
  Rng rng(47);
  std::vector<double> freq(9, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto r = imh_reconstruction(m, prop_src, 0, 1, rng);
    freq[r.source.first * 3 + r.source.second] += 1.0 / n;
  }
  double tv = 0.0;
  for (double f : freq) tv += std::abs(f - 1.0 / 9.0);
  CHECK(tv * 0.5 < 0.05);
}

TEST_CASE("imh_reconstruction: dominant weights concentrate the reconstruction") {
  const Vocab vf = make_vocab({"x", "y", "z"});
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}}), ve, 0.1);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  m.weights.translation[pack_pair(2, 0)] = 6.0;  // (z, a) and (z, b) dominate
  m.weights.translation[pack_pair(2, 1)] = 6.0;
  const Proposal prop_src = Proposal::build(m.weights, m.fs, 0.1, /*source_side=*/true);
  Rng rng(53);
  int hits = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const auto r = imh_reconstruction(m, prop_src, 0, 1, rng);
    if (r.source.first == 2 && r.source.second == 2) ++hits;
  }
  CHECK(static_cast<double>(hits) / n > 0.9);
}

TEST_CASE("imh_reconstruction: single source word is forced") {
  const Vocab vf = make_vocab({"x"});
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}}), ve, 0.1);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  const Proposal prop_src = uniform_proposal(m.fs, 0.1, true);
  Rng rng(59);
  for (int i = 0; i < 20; ++i) {
    const auto r = imh_reconstruction(m, prop_src, 0, 1, rng);
    CHECK((r.source.first == 0 && r.source.second == 0));
  }
}

TEST_CASE("cd_update: reconstruction equal to the data gives a zero delta") {
  const Vocab vf = make_vocab({"x"});  // |V_F| = 1 forces recon = data
  const Vocab ve = make_vocab({"a", "b"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 2}, {1, 0, 1}}), ve, 0.1);
  m.fs = FeatureSpace(vf, ve, false, 0.3);
  const Proposal tgt = uniform_proposal(m.fs);
  const Proposal src = uniform_proposal(m.fs, 0.1, true);
  SamplerConfig cfg;
  Rng rng(61);
  for (int i = 0; i < 10; ++i) {
    const CdDelta d = cd_update(m, tgt, src, 0, 0, cfg, rng);
    CHECK(d.reconstruction == WordPair{0, 0});
    CHECK(d.delta.l2_norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("cd_update delta matches independently computed feature differences") {
  const Vocab vf = make_vocab({"minuto", "zzzz"});
  const Vocab ve = make_vocab({"minute", "qqqq"});
  LogLinearModel m;
  m.lm = train_bigram_lm(make_table({{0, 1, 1}, {1, 0, 1}}), ve, 0.2);
  m.fs = FeatureSpace(vf, ve, true, 0.3);
  m.weights = init_weights(m.fs, InitConfig{});
  const Proposal tgt = Proposal::build(m.weights, m.fs, 0.1);
  const Proposal src = Proposal::build(m.weights, m.fs, 0.1, true);
  SamplerConfig cfg;
  cfg.learning_rate = 0.05;
  Rng rng(67);

  for (int i = 0; i < 200; ++i) {
    const CdDelta d = cd_update(m, tgt, src, 0, 0, cfg, rng);
    const auto [e1, e2] = d.posterior_sample;
    const auto [r1, r2] = d.reconstruction;
    // oracle feature counts from raw strings
    auto ortho = [&](WordId f, WordId e) {
      return oracle_norm_distance(vf.word(f), ve.word(e)) < 0.3 ? 1 : 0;
    };
    const double expected_ortho =
        cfg.learning_rate *
        ((ortho(0, e1) + ortho(0, e2)) - (ortho(r1, e1) + ortho(r2, e2)));
    CHECK(d.delta.ortho == doctest::Approx(expected_ortho));
    // data-side translation keys gain +lr, reconstruction keys -lr
    std::map<std::uint64_t, double> expected;
    expected[pack_pair(0, e1)] += cfg.learning_rate;
    expected[pack_pair(0, e2)] += cfg.learning_rate;
    expected[pack_pair(r1, e1)] -= cfg.learning_rate;
    expected[pack_pair(r2, e2)] -= cfg.learning_rate;
    for (const auto& [key, value] : expected) CHECK(d.delta.get(key) == doctest::Approx(value));
  }
}

TEST_CASE("averaged CD delta points along the exact gradient") {
  const TinyInstance inst = make_tiny_instance(71, 3, 3, /*ortho=*/true);
  const FeatureVec grad = exact_gradient(inst.model, inst.src);
  const Proposal tgt = Proposal::build(inst.model.weights, inst.model.fs, 0.1);
  const Proposal src = Proposal::build(inst.model.weights, inst.model.fs, 0.1, true);
  SamplerConfig cfg;
  cfg.learning_rate = 1.0;  // keep deltas directly comparable to the gradient
  Rng rng(73);

  FeatureVec mean;
  const auto entries = inst.src.sorted();
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto& entry = entries[static_cast<std::size_t>(i) % entries.size()];
    const CdDelta d = cd_update(inst.model, tgt, src, entry.w1, entry.w2, cfg, rng);
    mean.axpy(static_cast<double>(entry.count) / draws, d.delta);
  }
  double dot = mean.ortho * grad.ortho;
  for (const auto& [key, value] : mean.translation) dot += value * grad.get(key);
  CHECK(dot > 0.0);
}

TEST_CASE("samplers are deterministic given the seed") {
  const TinyInstance inst = make_tiny_instance(79, 3, 4, /*ortho=*/true);
  const Proposal prop = Proposal::build(inst.model.weights, inst.model.fs, 0.1);
  Rng rng_a(101), rng_b(101);
  const auto a = imh_posterior(inst.model, prop, 0, 1, 200, rng_a);
  const auto b = imh_posterior(inst.model, prop, 0, 1, 200, rng_b);
  CHECK(a.samples == b.samples);
  CHECK(a.accepted == b.accepted);

  Rng rng_c(103), rng_d(103);
  const auto c = gibbs_full(inst.model, prop, 100, rng_c);
  const auto d = gibbs_full(inst.model, prop, 100, rng_d);
  CHECK(c.source_samples == d.source_samples);
}
