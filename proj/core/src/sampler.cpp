#include "decipher/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace decipher {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_target(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2) {
  const double p = m.lm.prob(e1, e2);
  if (p <= 0.0) return kNegInf;
  return std::log(p) + score(m.weights, m.fs, f1, f2, e1, e2);
}

// resample one coordinate of the latent bigram; `first` selects e1 vs e2
WordId gibbs_step(const LogLinearModel& m, WordId f_sampled_word, WordId e_fixed, bool first,
                  Rng& rng, std::vector<double>& scratch) {
  const std::uint32_t ve = m.target_vocab_size();
  scratch.resize(ve);
  double max_logit = kNegInf;
  for (WordId e = 0; e < ve; ++e) {
    const double p = first ? m.lm.prob(e, e_fixed) : m.lm.prob(e_fixed, e);
    const double logit =
        p <= 0.0 ? kNegInf : std::log(p) + unigram_score(m.weights, m.fs, f_sampled_word, e);
    scratch[e] = logit;
    max_logit = std::max(max_logit, logit);
  }
  if (!std::isfinite(max_logit))
    throw DegenerateError("gibbs: zero conditional mass over the target vocabulary");
  double acc = 0.0;
  for (WordId e = 0; e < ve; ++e) {
    acc += std::exp(scratch[e] - max_logit);
    scratch[e] = acc;
  }
  return static_cast<WordId>(rng.pick_cdf(scratch));
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("sampler config: n_samples must be >= 1");
  if (iterations < 1) throw std::invalid_argument("sampler config: iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("sampler config: learning rate must be positive");
  if (!(p_backoff > 0.0 && p_backoff < 1.0))
    throw std::invalid_argument("sampler config: p_backoff must be in (0, 1)");
  if (qs_refresh_period < 1)
    throw std::invalid_argument("sampler config: qs_refresh_period must be >= 1");
  if (threads < 1) throw std::invalid_argument("sampler config: threads must be >= 1");
}

Proposal Proposal::build(const WeightVector& w, const FeatureSpace& fs, double p_backoff,
                         bool source_side) {
  Proposal prop;
  prop.p_backoff_ = p_backoff;
  const std::uint32_t n_rows = source_side ? fs.target_vocab().size() : fs.source_vocab().size();
  prop.cand_vocab_ = source_side ? fs.source_vocab().size() : fs.target_vocab().size();
  prop.rows_.resize(n_rows);

  // collect raw unigram scores per conditioning word
  for (const auto& [key, _] : w.translation) {
    const WordId f = pair_first(key), e = pair_second(key);
    const WordId cond = source_side ? e : f;
    const WordId cand = source_side ? f : e;
    if (cond >= n_rows || cand >= prop.cand_vocab_) continue;
    prop.rows_[cond].support.push_back(cand);
  }
  for (std::uint32_t cond = 0; cond < n_rows; ++cond) {
    Row& row = prop.rows_[cond];
    if (row.support.empty()) continue;
    std::sort(row.support.begin(), row.support.end());
    row.support.erase(std::unique(row.support.begin(), row.support.end()), row.support.end());

    double max_score = kNegInf;
    std::vector<double> scores(row.support.size());
    for (std::size_t i = 0; i < row.support.size(); ++i) {
      const WordId f = source_side ? row.support[i] : cond;
      const WordId e = source_side ? cond : row.support[i];
      scores[i] = unigram_score(w, fs, f, e);
      max_score = std::max(max_score, scores[i]);
    }
    double z = 0.0;
    for (double s : scores) z += std::exp(s - max_score);
    row.cdf.resize(row.support.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < row.support.size(); ++i) {
      const double q = std::exp(scores[i] - max_score) / z;
      acc += q;
      row.cdf[i] = acc;
      row.qs.emplace(row.support[i], q);
    }
  }
  return prop;
}

WordId Proposal::sample(WordId cond, Rng& rng) const {
  const Row& row = rows_[cond];
  if (row.support.empty()) return rng.below(cand_vocab_);
  if (rng.uniform() < p_backoff_) return rng.below(cand_vocab_);
  return row.support[rng.pick_cdf(row.cdf)];
}

double Proposal::density(WordId cond, WordId cand) const {
  const Row& row = rows_[cond];
  const double uniform = 1.0 / static_cast<double>(cand_vocab_);
  if (row.support.empty()) return uniform;
  auto it = row.qs.find(cand);
  const double qs = it == row.qs.end() ? 0.0 : it->second;
  return (1.0 - p_backoff_) * qs + p_backoff_ * uniform;
}

double Proposal::log_density(WordId cond, WordId cand) const {
  return std::log(density(cond, cand));
}

GibbsForcedResult gibbs_forced(const LogLinearModel& m, const Proposal& prop, WordId f1,
                               WordId f2, int n, Rng& rng) {
  GibbsForcedResult out;
  out.samples.reserve(static_cast<std::size_t>(n));
  WordId e1 = prop.sample(f1, rng);
  WordId e2 = prop.sample(f2, rng);
  std::vector<double> scratch;
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0)
      e1 = gibbs_step(m, f1, e2, /*first=*/true, rng, scratch);
    else
      e2 = gibbs_step(m, f2, e1, /*first=*/false, rng, scratch);
    out.samples.push_back({e1, e2});
    out.mean_phi.add_bigram(bigram_phi(f1, f2, e1, e2, m.fs), 1.0);
  }
  out.mean_phi.scale(1.0 / static_cast<double>(n));
  return out;
}

GibbsFullResult gibbs_full(const LogLinearModel& m, const Proposal& prop, int n, Rng& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t vf = m.source_vocab_size();
  GibbsFullResult out;
  out.source_samples.reserve(static_cast<std::size_t>(n));

  WordId f1 = rng.below(vf);
  WordId f2 = rng.below(vf);
  // latent state persists across the chain; one coordinate sweep per retained
  // source sample keeps it tracking the posterior of the current f1 f2
  WordId e1 = prop.sample(f1, rng);
  WordId e2 = prop.sample(f2, rng);
  std::vector<WordPair> set(static_cast<std::size_t>(n));
  std::vector<double> member_score(static_cast<std::size_t>(n));
  std::vector<double> cdf(vf);
  std::vector<double> scratch;

  for (int i = 0; i < n; ++i) {
    const bool resample_first = (i % 2 == 0);
    const WordId f_fixed = resample_first ? f2 : f1;

    // fresh approximation set S ~ p(e1 e2) for this conditional
    for (int j = 0; j < n; ++j) set[static_cast<std::size_t>(j)] = m.lm.sample(rng);

    // fixed slot contributes exp(score(f_fixed, e_fixed_slot)) per member
    double max_logit = kNegInf;
    for (int j = 0; j < n; ++j) {
      const WordId e_fixed = resample_first ? set[static_cast<std::size_t>(j)].second
                                            : set[static_cast<std::size_t>(j)].first;
      member_score[static_cast<std::size_t>(j)] = unigram_score(m.weights, m.fs, f_fixed, e_fixed);
    }

    // logits over candidate source words; two passes for a stable softmax
    for (WordId f = 0; f < vf; ++f) {
      for (int j = 0; j < n; ++j) {
        const WordId e_free = resample_first ? set[static_cast<std::size_t>(j)].first
                                             : set[static_cast<std::size_t>(j)].second;
        max_logit = std::max(max_logit, unigram_score(m.weights, m.fs, f, e_free) +
                                            member_score[static_cast<std::size_t>(j)]);
      }
    }
    double acc = 0.0;
    for (WordId f = 0; f < vf; ++f) {
      double mass = 0.0;
      for (int j = 0; j < n; ++j) {
        const WordId e_free = resample_first ? set[static_cast<std::size_t>(j)].first
                                             : set[static_cast<std::size_t>(j)].second;
        mass += std::exp(unigram_score(m.weights, m.fs, f, e_free) +
                         member_score[static_cast<std::size_t>(j)] - max_logit);
      }
      acc += mass;
      cdf[f] = acc;
    }
    const WordId picked = static_cast<WordId>(rng.pick_cdf(cdf));
    if (resample_first)
      f1 = picked;
    else
      f2 = picked;
    out.source_samples.push_back({f1, f2});

    e1 = gibbs_step(m, f1, e2, /*first=*/true, rng, scratch);
    e2 = gibbs_step(m, f2, e1, /*first=*/false, rng, scratch);
    out.mean_phi.add_bigram(bigram_phi(f1, f2, e1, e2, m.fs), 1.0);
  }
  out.mean_phi.scale(1.0 / static_cast<double>(n));
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ImhResult imh_posterior(const LogLinearModel& m, const Proposal& prop, WordId f1, WordId f2,
                        int n, Rng& rng) {
  ImhResult out;
  out.samples.reserve(static_cast<std::size_t>(n));

  WordId e1 = prop.sample(f1, rng);
  WordId e2 = prop.sample(f2, rng);
  double cur_lp = log_target(m, f1, f2, e1, e2);
  double cur_lq = prop.log_density(f1, e1) + prop.log_density(f2, e2);

  for (int i = 0; i < n; ++i) {
    const WordId n1 = prop.sample(f1, rng);
    const WordId n2 = prop.sample(f2, rng);
    const double new_lp = log_target(m, f1, f2, n1, n2);
    const double new_lq = prop.log_density(f1, n1) + prop.log_density(f2, n2);

    bool accept;
    if (new_lp == kNegInf) {
      accept = false;  // never move into a zero-probability state
    } else if (cur_lp == kNegInf) {
      accept = true;   // always escape one
    } else {
      const double log_ratio = (new_lp - cur_lp) + (cur_lq - new_lq);
      accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
    }
    if (accept) {
      e1 = n1;
      e2 = n2;
      cur_lp = new_lp;
      cur_lq = new_lq;
      ++out.accepted;
    }
    out.samples.push_back({e1, e2});  // rejected proposals repeat the state
    out.mean_phi.add_bigram(bigram_phi(f1, f2, e1, e2, m.fs), 1.0);
  }
  out.mean_phi.scale(1.0 / static_cast<double>(n));
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(n);
  return out;
}

ReconstructionResult imh_reconstruction(const LogLinearModel& m, const Proposal& prop_src,
                                        WordId e1, WordId e2, Rng& rng) {
  // target: p(f1 f2 | e1 e2) ~ exp(w . Phi); the LM factor is constant here
  WordId f1 = prop_src.sample(e1, rng);
  WordId f2 = prop_src.sample(e2, rng);
  double cur_lp = score(m.weights, m.fs, f1, f2, e1, e2);
  double cur_lq = prop_src.log_density(e1, f1) + prop_src.log_density(e2, f2);

  const WordId n1 = prop_src.sample(e1, rng);
  const WordId n2 = prop_src.sample(e2, rng);
  const double new_lp = score(m.weights, m.fs, n1, n2, e1, e2);
  const double new_lq = prop_src.log_density(e1, n1) + prop_src.log_density(e2, n2);

  const double log_ratio = (new_lp - cur_lp) + (cur_lq - new_lq);
  const bool accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
  if (accept) {
    f1 = n1;
    f2 = n2;
  }
  return {{f1, f2}, accept};
}

CdDelta cd_update(const LogLinearModel& m, const Proposal& prop_tgt, const Proposal& prop_src,
                  WordId f1, WordId f2, const SamplerConfig& cfg, Rng& rng) {
  CdDelta out;
  const ImhResult post = imh_posterior(m, prop_tgt, f1, f2, /*n=*/1, rng);
  const WordPair e = post.samples.front();
  const ReconstructionResult recon = imh_reconstruction(m, prop_src, e.first, e.second, rng);

  out.delta.add_bigram(bigram_phi(f1, f2, e.first, e.second, m.fs), cfg.learning_rate);
  out.delta.add_bigram(bigram_phi(recon.source.first, recon.source.second, e.first, e.second, m.fs),
                       -cfg.learning_rate);
  out.posterior_sample = e;
  out.reconstruction = recon.source;
  out.proposals = 2;
  out.accepted = post.accepted + (recon.accepted ? 1 : 0);
  return out;
}

}  // namespace decipher
