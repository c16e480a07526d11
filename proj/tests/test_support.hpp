#pragma once

// Shared helpers for the test suites: tiny-instance builders plus independent
// brute-force oracles. The oracles only touch model *data* (LM probabilities,
// the raw weight map, vocab strings) and reimplement all derived quantities
// themselves, so they stay independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "decipher/bigram_lm.hpp"
#include "decipher/corpus.hpp"
#include "decipher/loglinear.hpp"

namespace test_support {

using namespace decipher;

// ---------------------------------------------------------------- corpora --

inline Corpus make_corpus(std::vector<std::vector<std::string>> sentences) {
  Corpus c;
  c.sentences = std::move(sentences);
  return c;
}

inline Vocab make_vocab(const std::vector<std::string>& words) {
  Vocab v;
  for (const auto& w : words) v.add(w);
  return v;
}

// BigramTable from (w1, w2, count) triples over an id space
inline BigramTable make_table(const std::vector<std::tuple<WordId, WordId, std::uint32_t>>& rows) {
  BigramTable t;
  for (const auto& [a, b, c] : rows) {
    t.counts[pack_pair(a, b)] += c;
    t.total += c;
  }
  return t;
}

// ---------------------------------------------- independent string oracle --

// classic full-matrix DP, kept separate from the two-row library version
inline std::size_t oracle_levenshtein(const std::string& a8, const std::string& b8) {
  const std::u32string a = utf8_decode(a8), b = utf8_decode(b8);
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return d[a.size()][b.size()];
}

inline double oracle_norm_distance(const std::string& a, const std::string& b) {
  const std::size_t la = utf8_decode(a).size(), lb = utf8_decode(b).size();
  return static_cast<double>(oracle_levenshtein(a, b)) / static_cast<double>(std::max(la, lb));
}

// ------------------------------------------------------ model enumeration --

inline bool oracle_ortho(const LogLinearModel& m, WordId f, WordId e) {
  if (!m.fs.ortho_enabled()) return false;
  return oracle_norm_distance(m.fs.source_vocab().word(f), m.fs.target_vocab().word(e)) <
         m.fs.threshold();
}

inline double oracle_weight(const LogLinearModel& m, WordId f, WordId e) {
  auto it = m.weights.translation.find(pack_pair(f, e));
  return it == m.weights.translation.end() ? 0.0 : it->second;
}

inline double oracle_score(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2) {
  double s = oracle_weight(m, f1, e1) + oracle_weight(m, f2, e2);
  if (oracle_ortho(m, f1, e1)) s += m.weights.ortho_weight;
  if (oracle_ortho(m, f2, e2)) s += m.weights.ortho_weight;
  return s;
}

inline double oracle_unnorm(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2) {
  return m.lm.prob(e1, e2) * std::exp(oracle_score(m, f1, f2, e1, e2));
}

// feature vector as explicit maps for transparent comparisons
struct OracleVec {
  std::map<std::uint64_t, double> translation;
  double ortho = 0.0;

  void add_pair(WordId f, WordId e, double v, const LogLinearModel& m) {
    translation[pack_pair(f, e)] += v;
    if (oracle_ortho(m, f, e)) ortho += v;
  }
};

inline std::vector<double> oracle_posterior(const LogLinearModel& m, WordId f1, WordId f2) {
  const std::uint32_t ve = m.fs.target_vocab().size();
  std::vector<double> out(static_cast<std::size_t>(ve) * ve);
  double z = 0.0;
  for (WordId e1 = 0; e1 < ve; ++e1)
    for (WordId e2 = 0; e2 < ve; ++e2) {
      out[e1 * ve + e2] = oracle_unnorm(m, f1, f2, e1, e2);
      z += out[e1 * ve + e2];
    }
  for (double& p : out) p /= z;
  return out;
}

inline OracleVec oracle_forced(const LogLinearModel& m, const BigramTable& src) {
  const std::uint32_t ve = m.fs.target_vocab().size();
  OracleVec out;
  for (const auto& entry : src.sorted()) {
    const auto post = oracle_posterior(m, entry.w1, entry.w2);
    for (WordId e1 = 0; e1 < ve; ++e1)
      for (WordId e2 = 0; e2 < ve; ++e2) {
        const double w = post[e1 * ve + e2] * entry.count;
        out.add_pair(entry.w1, e1, w, m);
        out.add_pair(entry.w2, e2, w, m);
      }
  }
  return out;
}

inline OracleVec oracle_full(const LogLinearModel& m) {
  const std::uint32_t vf = m.fs.source_vocab().size(), ve = m.fs.target_vocab().size();
  OracleVec out;
  double z = 0.0;
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2)
      for (WordId e1 = 0; e1 < ve; ++e1)
        for (WordId e2 = 0; e2 < ve; ++e2) z += oracle_unnorm(m, f1, f2, e1, e2);
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2)
      for (WordId e1 = 0; e1 < ve; ++e1)
        for (WordId e2 = 0; e2 < ve; ++e2) {
          const double w = oracle_unnorm(m, f1, f2, e1, e2) / z;
          out.add_pair(f1, e1, w, m);
          out.add_pair(f2, e2, w, m);
        }
  return out;
}

inline double oracle_loglik(const LogLinearModel& m, const BigramTable& src) {
  const std::uint32_t vf = m.fs.source_vocab().size(), ve = m.fs.target_vocab().size();
  std::vector<double> z_given(static_cast<std::size_t>(vf) * vf, 0.0);
  double zg = 0.0;
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2) {
      for (WordId e1 = 0; e1 < ve; ++e1)
        for (WordId e2 = 0; e2 < ve; ++e2)
          z_given[f1 * vf + f2] += oracle_unnorm(m, f1, f2, e1, e2);
      zg += z_given[f1 * vf + f2];
    }
  double ll = 0.0;
  for (const auto& entry : src.sorted())
    ll += entry.count * (std::log(z_given[entry.w1 * vf + entry.w2]) - std::log(zg));
  return ll;
}

// largest |impl - oracle| over the union of translation keys and ortho
inline double linf_vs_oracle(const FeatureVec& impl, const OracleVec& oracle) {
  double worst = std::abs(impl.ortho - oracle.ortho);
  for (const auto& [k, v] : oracle.translation) worst = std::max(worst, std::abs(impl.get(k) - v));
  for (const auto& [k, v] : impl.translation) {
    auto it = oracle.translation.find(k);
    const double o = it == oracle.translation.end() ? 0.0 : it->second;
    worst = std::max(worst, std::abs(v - o));
  }
  return worst;
}

// ------------------------------------------------------------- statistics --

// total variation between an empirical sample list over V_E^2 and an exact
// distribution indexed e1 * ve + e2
inline double tv_distance(const std::vector<std::pair<WordId, WordId>>& samples,
                          const std::vector<double>& exact, std::uint32_t ve) {
  std::vector<double> freq(exact.size(), 0.0);
  for (const auto& [e1, e2] : samples) freq[e1 * ve + e2] += 1.0;
  for (double& f : freq) f /= static_cast<double>(samples.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) tv += std::abs(freq[i] - exact[i]);
  return 0.5 * tv;
}

// chi-square upper critical values at alpha = 0.01
inline double chi2_critical_01(int df) {
  static const std::map<int, double> table = {
      {1, 6.635}, {2, 9.210},  {3, 11.345}, {4, 13.277}, {5, 15.086},
      {6, 16.812}, {7, 18.475}, {8, 20.090}, {9, 21.666}, {15, 30.578}};
  auto it = table.find(df);
  if (it == table.end()) throw std::runtime_error("chi2 critical value not tabulated");
  return it->second;
}

// -------------------------------------------------------- random instances --

// deterministic tiny model: random LM counts, random sparse weights
struct TinyInstance {
  LogLinearModel model;
  BigramTable src;
};

inline TinyInstance make_tiny_instance(std::uint64_t seed, std::uint32_t vf_size,
                                       std::uint32_t ve_size, bool ortho, double lm_k = 0.1) {
  Rng rng(seed);
  // short words so some cross-language pairs land under the 0.3 threshold
  const std::vector<std::string> pool = {"mano",  "mane",  "lobo",  "lobe",  "casa",
                                         "case",  "perro", "perry", "vino",  "wine",
                                         "sol",   "solar", "mar",   "march", "pan",
                                         "pane",  "luz",   "lux",   "flor",  "floor"};
  Vocab vf, ve;
  for (std::uint32_t i = 0; i < vf_size; ++i) vf.add(pool[(2 * i) % pool.size()] + "x");
  for (std::uint32_t i = 0; i < ve_size; ++i) ve.add(pool[(2 * i + 1) % pool.size()]);

  BigramTable target_bigrams;
  for (int i = 0; i < 12; ++i) {
    const WordId a = rng.below(ve_size), b = rng.below(ve_size);
    target_bigrams.counts[pack_pair(a, b)] += 1 + rng.below(4);
  }
  for (const auto& [_, c] : target_bigrams.counts) target_bigrams.total += c;

  TinyInstance out;
  out.model.lm = train_bigram_lm(target_bigrams, ve, lm_k);
  out.model.fs = FeatureSpace(vf, ve, ortho, 0.3);
  // every pair stored, as after seeding plus a few sampling passes; rows with
  // near-empty support would starve the independence proposals
  for (std::uint32_t f = 0; f < vf_size; ++f)
    for (std::uint32_t e = 0; e < ve_size; ++e)
      out.model.weights.translation[pack_pair(f, e)] = (rng.uniform() - 0.5);
  out.model.weights.ortho_weight = ortho ? 0.8 : 0.0;

  for (int i = 0; i < 8; ++i) {
    const WordId a = rng.below(vf_size), b = rng.below(vf_size);
    out.src.counts[pack_pair(a, b)] += 1 + rng.below(3);
  }
  for (const auto& [_, c] : out.src.counts) out.src.total += c;
  return out;
}

}  // namespace test_support
