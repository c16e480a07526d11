#pragma once

#include <vector>

#include "decipher/bigram_lm.hpp"
#include "decipher/corpus.hpp"
#include "decipher/features.hpp"

namespace decipher {

// Chain MRF over an observed source bigram and its latent target bigram:
//   p(f1 f2, e1 e2) = exp(w . Phi(f1 f2, e1 e2)) p(e1 e2) / Z
// The exact operations below enumerate the candidate spaces and are feasible
// only for tiny vocabularies; they serve as the correctness oracle for the
// samplers and are guarded accordingly.
struct LogLinearModel {
  FeatureSpace fs;
  BigramLM lm;
  WeightVector weights;

  std::uint32_t source_vocab_size() const { return fs.source_vocab().size(); }
  std::uint32_t target_vocab_size() const { return fs.target_vocab().size(); }
};

// exp(w . Phi) * p(e1 e2), unnormalized
double unnorm_joint(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2);

// p(e1 e2 | f1 f2) as a dense vector indexed e1 * |V_E| + e2.
// Guard: |V_E| <= 64.
std::vector<double> exact_posterior(const LogLinearModel& m, WordId f1, WordId f2);

// Sum over observed source bigrams (token-count weighted) of the posterior
// feature expectation. Guard as exact_posterior.
FeatureVec exact_forced_expectation(const LogLinearModel& m, const BigramTable& src);

// Feature expectation under the model joint over (f1 f2, e1 e2).
// Guard: |V_F|^2 * |V_E|^2 <= 10^7.
FeatureVec exact_full_expectation(const LogLinearModel& m);

// forced - N * full, with N the total source bigram token count; the full
// term is per-datum, so scaling by N weights both sides equally.
FeatureVec exact_gradient(const LogLinearModel& m, const BigramTable& src);

// Sum of count * log( Z(f1 f2) / Z_g ), the exact source log-likelihood.
double exact_loglik(const LogLinearModel& m, const BigramTable& src);

}  // namespace decipher
