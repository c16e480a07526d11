#pragma once

#include <unordered_map>
#include <utility>
#include <vector>

#include "decipher/loglinear.hpp"

namespace decipher {

struct SamplerConfig {
  int n_samples = 50;          // samples per observed bigram per iteration
  int iterations = 50;
  double learning_rate = 0.05;
  double p_backoff = 0.1;
  int qs_refresh_period = 5;   // proposal rebuild cadence (gradient-descent iterations)
  std::uint64_t rng_seed = 1;
  int threads = 1;

  void validate() const;  // throws std::invalid_argument
};

// Independence proposal q_u(cand | cond) = (1 - p_b) q_s(cand | cond) + p_b / V,
// where q_s is a softmax of the stored unigram scores over the sparse support
// {cand : (cond, cand) in w}. An empty support degenerates to the uniform
// distribution. The same structure serves both directions: target words given
// a source word, and (transposed) source words given a target word.
class Proposal {
 public:
  Proposal() = default;

  // source_side = false: rows over V_F proposing target words (posterior IMH)
  // source_side = true:  rows over V_E proposing source words (reconstruction)
  static Proposal build(const WeightVector& w, const FeatureSpace& fs, double p_backoff,
                        bool source_side = false);

  WordId sample(WordId cond, Rng& rng) const;
  double density(WordId cond, WordId cand) const;
  double log_density(WordId cond, WordId cand) const;

  std::uint32_t candidate_vocab() const { return cand_vocab_; }

 private:
  struct Row {
    std::vector<WordId> support;                     // sorted candidate ids
    std::vector<double> cdf;                         // cumulative q_s over support
    std::unordered_map<WordId, double> qs;           // q_s per candidate
  };
  std::vector<Row> rows_;
  double p_backoff_ = 0.1;
  std::uint32_t cand_vocab_ = 0;
};

using WordPair = std::pair<WordId, WordId>;

struct GibbsForcedResult {
  std::vector<WordPair> samples;  // one per coordinate update
  FeatureVec mean_phi;            // average Phi(f1 f2, sample)
};

// Gibbs chain over the latent target bigram for one observed source bigram.
// Each step resamples one coordinate from p(e | other, f1 f2) exactly
// (normalized over V_E) and records the state. The chain starts from the
// proposal distribution.
GibbsForcedResult gibbs_forced(const LogLinearModel& m, const Proposal& prop, WordId f1,
                               WordId f2, int n, Rng& rng);

struct GibbsFullResult {
  std::vector<WordPair> source_samples;
  FeatureVec mean_phi;  // average over joint (source sample, posterior sample) pairs
  double seconds = 0.0;
};

// Gibbs chain over source bigrams targeting the model marginal p(f1 f2).
// Each conditional p(f1 | f2) is approximated with a fresh set S of n target
// bigrams drawn from the LM. A latent target bigram rides along the chain
// (initialized from the proposal, refreshed by one full coordinate sweep per
// retained source sample) and supplies the e1 e2 side of each joint Phi.
GibbsFullResult gibbs_full(const LogLinearModel& m, const Proposal& prop, int n, Rng& rng);

struct ImhResult {
  std::vector<WordPair> samples;  // rejected proposals repeat the current state
  FeatureVec mean_phi;
  int accepted = 0;
  double acceptance_rate = 0.0;
};

// Independence Metropolis-Hastings targeting p(e1 e2 | f1 f2) with proposal
// q_u(e1|f1) q_u(e2|f2) and acceptance ratio
//   P_a = [p~(new) / p~(cur)] * [q(cur) / q(new)].
ImhResult imh_posterior(const LogLinearModel& m, const Proposal& prop, WordId f1, WordId f2,
                        int n, Rng& rng);

struct ReconstructionResult {
  WordPair source;
  bool accepted = false;
};

// One IMH step targeting p(f1 f2 | e1 e2) ~ exp(w . Phi) with the mirrored
// (source-side) proposal; the initial state is drawn from that proposal.
ReconstructionResult imh_reconstruction(const LogLinearModel& m, const Proposal& prop_src,
                                        WordId e1, WordId e2, Rng& rng);

struct CdDelta {
  FeatureVec delta;            // already scaled by the learning rate
  WordPair posterior_sample;   // the retained e1 e2
  WordPair reconstruction;     // the reconstructed f1 f2
  int proposals = 0;           // IMH proposals made (posterior + reconstruction)
  int accepted = 0;
};

// One contrastive-divergence draw for one observed bigram: a posterior sample
// via IMH (single retained sample), a reconstructed source bigram via one
// reconstruction step, and the resulting weight delta
//   lr * [ Phi(data, e1 e2) - Phi(recon, e1 e2) ].
CdDelta cd_update(const LogLinearModel& m, const Proposal& prop_tgt, const Proposal& prop_src,
                  WordId f1, WordId f2, const SamplerConfig& cfg, Rng& rng);

}  // namespace decipher
