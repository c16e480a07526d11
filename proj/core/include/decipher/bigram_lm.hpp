#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "decipher/corpus.hpp"
#include "decipher/util.hpp"

namespace decipher {

// Add-k smoothed joint distribution over ordered target word pairs:
//   p(e1, e2) = (count(e1, e2) + k) / (total + k * |V|^2)
// Stored as the uniform floor plus sparse per-pair excess, which keeps
// memory at O(unique bigrams) for any vocabulary size.
class BigramLM {
 public:
  BigramLM() = default;

  double prob(WordId e1, WordId e2) const;
  double marginal_first(WordId e1) const;   // sum over e2 of prob(e1, e2)
  double cond_second(WordId e1, WordId e2) const;  // p(e2 | e1)

  // one draw from the joint
  std::pair<WordId, WordId> sample(Rng& rng) const;

  const Vocab& vocab() const { return vocab_; }
  std::uint32_t vocab_size() const { return vocab_.size(); }
  double smoothing_k() const { return smoothing_k_; }
  double floor() const { return floor_; }

  void save_tsv(std::ostream& out) const;

  friend BigramLM train_bigram_lm(const BigramTable&, const Vocab&, double);
  friend BigramLM load_lm_tsv(std::istream&, const Vocab&);

 private:
  void build_sampler();

  Vocab vocab_;
  double smoothing_k_ = 0.0;
  double floor_ = 0.0;                                  // prob of an unseen pair
  std::unordered_map<std::uint64_t, double> excess_;    // prob above the floor
  std::unordered_map<WordId, double> row_excess_;       // per-e1 excess mass

  // sampling state: sorted entries + cumulative excess mass
  std::vector<std::uint64_t> entry_keys_;
  std::vector<double> entry_cdf_;
  double excess_mass_ = 0.0;
};

// Throws DegenerateError for an empty table with k = 0; std::invalid_argument
// for k < 0 or an empty vocab.
BigramLM train_bigram_lm(const BigramTable& bigrams, const Vocab& vocab, double smoothing_k);

// TSV round-trip: `e1 <TAB> e2 <TAB> prob` for every pair above the floor,
// preceded by a `# floor <value>` header so unlisted pairs keep their mass.
BigramLM load_lm_tsv(std::istream& in, const Vocab& vocab);

}  // namespace decipher
