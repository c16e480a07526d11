#include "decipher/bigram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace decipher {

double BigramLM::prob(WordId e1, WordId e2) const {
  if (e1 >= vocab_.size() || e2 >= vocab_.size())
    throw std::out_of_range("bigram lm: word id out of range");
  auto it = excess_.find(pack_pair(e1, e2));
  return floor_ + (it == excess_.end() ? 0.0 : it->second);
}

double BigramLM::marginal_first(WordId e1) const {
  if (e1 >= vocab_.size()) throw std::out_of_range("bigram lm: word id out of range");
  auto it = row_excess_.find(e1);
  return floor_ * vocab_.size() + (it == row_excess_.end() ? 0.0 : it->second);
}

double BigramLM::cond_second(WordId e1, WordId e2) const {
  const double m = marginal_first(e1);
  if (m <= 0.0) throw DegenerateError("bigram lm: zero marginal for conditioning word");
  return prob(e1, e2) / m;
}

std::pair<WordId, WordId> BigramLM::sample(Rng& rng) const {
  const double uniform_mass = floor_ * vocab_.size() * vocab_.size();
  const double total = uniform_mass + excess_mass_;
  if (rng.uniform() * total < excess_mass_ && !entry_keys_.empty()) {
    const std::uint64_t key = entry_keys_[rng.pick_cdf(entry_cdf_)];
    return {pair_first(key), pair_second(key)};
  }
  return {rng.below(vocab_.size()), rng.below(vocab_.size())};
}

void BigramLM::build_sampler() {
  entry_keys_.clear();
  entry_cdf_.clear();
  entry_keys_.reserve(excess_.size());
  for (const auto& [key, _] : excess_) entry_keys_.push_back(key);
  std::sort(entry_keys_.begin(), entry_keys_.end());
  entry_cdf_.reserve(entry_keys_.size());
  double acc = 0.0;
  for (std::uint64_t key : entry_keys_) {
    acc += excess_.at(key);
    entry_cdf_.push_back(acc);
  }
  excess_mass_ = acc;
}

BigramLM train_bigram_lm(const BigramTable& bigrams, const Vocab& vocab, double smoothing_k) {
  if (vocab.size() == 0) throw std::invalid_argument("bigram lm: empty vocab");
  if (smoothing_k < 0.0) throw std::invalid_argument("bigram lm: negative smoothing k");
  if (bigrams.total == 0 && smoothing_k == 0.0)
    throw DegenerateError("bigram lm: no bigrams and no smoothing mass");

  BigramLM lm;
  lm.vocab_ = vocab;
  lm.smoothing_k_ = smoothing_k;
  const double v = static_cast<double>(vocab.size());
  const double denom = static_cast<double>(bigrams.total) + smoothing_k * v * v;
  lm.floor_ = smoothing_k / denom;
  for (const auto& [key, count] : bigrams.counts) {
    const double p = static_cast<double>(count) / denom;
    lm.excess_.emplace(key, p);
    lm.row_excess_[pair_first(key)] += p;
  }
  lm.build_sampler();
  return lm;
}

void BigramLM::save_tsv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "# floor\t" << floor_ << "\n";
  // entry_keys_ is sorted, so dumps are byte-stable
  for (std::uint64_t key : entry_keys_) {
    out << vocab_.word(pair_first(key)) << '\t' << vocab_.word(pair_second(key)) << '\t'
        << (floor_ + excess_.at(key)) << '\n';
  }
  out.precision(old_precision);
}

BigramLM load_lm_tsv(std::istream& in, const Vocab& vocab) {
  BigramLM lm;
  lm.vocab_ = vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line.rfind("# floor", 0) == 0) {
      std::string hash, name;
      ss >> hash >> name >> lm.floor_;
      continue;
    }
    std::string w1, w2;
    double p = 0.0;
    if (!std::getline(ss, w1, '\t') || !std::getline(ss, w2, '\t') || !(ss >> p))
      throw DecodeError("lm tsv line " + std::to_string(line_no) + ": expected e1<TAB>e2<TAB>prob");
    const auto e1 = vocab.id(w1), e2 = vocab.id(w2);
    if (!e1 || !e2)
      throw DecodeError("lm tsv line " + std::to_string(line_no) + ": word not in vocab");
    const double excess = p - lm.floor_;
    if (excess > 0.0) {
      lm.excess_[pack_pair(*e1, *e2)] = excess;
      lm.row_excess_[*e1] += excess;
    }
  }
  lm.build_sampler();
  return lm;
}

}  // namespace decipher
