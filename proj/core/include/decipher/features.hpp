#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "decipher/corpus.hpp"
#include "decipher/util.hpp"

namespace decipher {

// Levenshtein distance (unit costs, Unicode scalar values) divided by the
// longer length. Symmetric, zero iff equal, always in [0, 1].
// Throws std::invalid_argument on an empty token.
double normalized_edit_distance(std::string_view f, std::string_view e);

// Unigram feature evaluation for one (f, e) pair: the pair itself is the
// translation feature key; the shared orthographic indicator fires when the
// normalized edit distance is under the threshold.
struct FeatureVector {
  std::uint64_t translation_key;
  bool ortho_fired;
};

// Feature context for a fixed pair of vocabularies: which (f, e) pairs are
// orthographically similar, precomputed once. The threshold is fixed for the
// lifetime of a model.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(Vocab source, Vocab target, bool ortho_enabled, double threshold);

  bool ortho(WordId f, WordId e) const {
    if (!ortho_enabled_) return false;
    const std::size_t bit = static_cast<std::size_t>(f) * target_.size() + e;
    return (sim_bits_[bit >> 6] >> (bit & 63)) & 1u;
  }

  const Vocab& source_vocab() const { return source_; }
  const Vocab& target_vocab() const { return target_; }
  bool ortho_enabled() const { return ortho_enabled_; }
  double threshold() const { return threshold_; }

 private:
  Vocab source_;
  Vocab target_;
  bool ortho_enabled_ = false;
  double threshold_ = 0.3;
  std::vector<std::uint64_t> sim_bits_;
};

// Sparse model parameters: per-pair translation weights (only pairs seeded at
// init or observed during sampling are stored) plus the single shared
// orthographic weight.
struct WeightVector {
  std::unordered_map<std::uint64_t, double> translation;
  double ortho_weight = 0.0;

  double get(WordId f, WordId e) const {
    auto it = translation.find(pack_pair(f, e));
    return it == translation.end() ? 0.0 : it->second;
  }
  // inserts the key at zero first, so sampled-but-unseeded pairs enter the model
  void add(WordId f, WordId e, double delta) { translation[pack_pair(f, e)] += delta; }
  std::size_t size() const { return translation.size(); }
};

FeatureVector phi(WordId f, WordId e, const FeatureSpace& fs);

struct BigramFeatures {
  std::uint64_t key1, key2;  // translation keys (f1,e1), (f2,e2); may coincide
  int ortho_count;           // 0, 1 or 2
};

BigramFeatures bigram_phi(WordId f1, WordId f2, WordId e1, WordId e2, const FeatureSpace& fs);

// w . phi(f, e)
inline double unigram_score(const WeightVector& w, const FeatureSpace& fs, WordId f, WordId e) {
  return w.get(f, e) + (fs.ortho(f, e) ? w.ortho_weight : 0.0);
}

// w . Phi(f1 f2, e1 e2); unobserved translation pairs contribute zero
inline double score(const WeightVector& w, const FeatureSpace& fs, WordId f1, WordId f2,
                    WordId e1, WordId e2) {
  return unigram_score(w, fs, f1, e1) + unigram_score(w, fs, f2, e2);
}

// Sparse feature-indexed vector: expectations, gradients, weight deltas.
struct FeatureVec {
  std::unordered_map<std::uint64_t, double> translation;
  double ortho = 0.0;

  void add_bigram(const BigramFeatures& bf, double scale) {
    translation[bf.key1] += scale;
    translation[bf.key2] += scale;
    ortho += scale * bf.ortho_count;
  }
  void axpy(double alpha, const FeatureVec& other) {
    for (const auto& [key, value] : other.translation) translation[key] += alpha * value;
    ortho += alpha * other.ortho;
  }
  void scale(double alpha) {
    for (auto& [key, value] : translation) value *= alpha;
    ortho *= alpha;
  }
  double get(std::uint64_t key) const {
    auto it = translation.find(key);
    return it == translation.end() ? 0.0 : it->second;
  }
  double l2_norm() const;
};

// max over the union of keys (including the ortho slot) of |a - b|
double linf_diff(const FeatureVec& a, const FeatureVec& b);

struct InitConfig {
  bool ortho_enabled = true;
  double threshold = 0.3;
  double ortho_weight = 1.0;   // initial weight of the orthographic feature
  double seed_weight = 0.1;    // initial weight for orthographically similar pairs
};

// With ortho features on: ortho weight 1.0 and every similar pair seeded at
// 0.1. With them off: nothing is stored (all weights are implicitly zero).
WeightVector init_weights(const FeatureSpace& fs, const InitConfig& cfg);

// TSV dump: `# ortho_weight <value>` header (only when ortho is enabled),
// then `f <TAB> e <TAB> weight` sorted by the word pair.
void save_weights_tsv(std::ostream& out, const WeightVector& w, const FeatureSpace& fs);
WeightVector load_weights_tsv(std::istream& in, const Vocab& source, const Vocab& target);

}  // namespace decipher
