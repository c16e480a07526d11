#include "decipher/loglinear.hpp"

#include <cmath>
#include <limits>

namespace decipher {
namespace {

constexpr std::uint32_t kPosteriorGuard = 64;
constexpr double kFullGuard = 1e7;

void check_posterior_guard(const LogLinearModel& m) {
  if (m.target_vocab_size() > kPosteriorGuard)
    throw SizeError("exact posterior: |V_E| exceeds enumeration guard");
}

void check_full_guard(const LogLinearModel& m) {
  const double vf = m.source_vocab_size(), ve = m.target_vocab_size();
  if (vf * vf * ve * ve > kFullGuard)
    throw SizeError("exact full expectation: |V_F|^2 * |V_E|^2 exceeds enumeration guard");
}

// log( p(e1 e2) * exp(score) ), -inf when the LM assigns zero mass
double log_unnorm(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2) {
  const double p = m.lm.prob(e1, e2);
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(p) + score(m.weights, m.fs, f1, f2, e1, e2);
}

// log Z(f1 f2) via logsumexp over V_E^2
double log_partition_given(const LogLinearModel& m, WordId f1, WordId f2) {
  const std::uint32_t ve = m.target_vocab_size();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (WordId e1 = 0; e1 < ve; ++e1)
    for (WordId e2 = 0; e2 < ve; ++e2)
      max_logit = std::max(max_logit, log_unnorm(m, f1, f2, e1, e2));
  if (!std::isfinite(max_logit))
    throw DegenerateError("exact: zero posterior mass for a source bigram");
  double acc = 0.0;
  for (WordId e1 = 0; e1 < ve; ++e1)
    for (WordId e2 = 0; e2 < ve; ++e2)
      acc += std::exp(log_unnorm(m, f1, f2, e1, e2) - max_logit);
  return max_logit + std::log(acc);
}

}  // namespace

double unnorm_joint(const LogLinearModel& m, WordId f1, WordId f2, WordId e1, WordId e2) {
  return m.lm.prob(e1, e2) * std::exp(score(m.weights, m.fs, f1, f2, e1, e2));
}

std::vector<double> exact_posterior(const LogLinearModel& m, WordId f1, WordId f2) {
  check_posterior_guard(m);
  const std::uint32_t ve = m.target_vocab_size();
  std::vector<double> logits(static_cast<std::size_t>(ve) * ve);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (WordId e1 = 0; e1 < ve; ++e1)
    for (WordId e2 = 0; e2 < ve; ++e2) {
      const double l = log_unnorm(m, f1, f2, e1, e2);
      logits[static_cast<std::size_t>(e1) * ve + e2] = l;
      max_logit = std::max(max_logit, l);
    }
  if (!std::isfinite(max_logit))
    throw DegenerateError("exact posterior: zero mass for the source bigram");
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

FeatureVec exact_forced_expectation(const LogLinearModel& m, const BigramTable& src) {
  check_posterior_guard(m);
  const std::uint32_t ve = m.target_vocab_size();
  FeatureVec out;
  for (const auto& entry : src.sorted()) {
    const std::vector<double> post = exact_posterior(m, entry.w1, entry.w2);
    for (WordId e1 = 0; e1 < ve; ++e1)
      for (WordId e2 = 0; e2 < ve; ++e2) {
        const double p = post[static_cast<std::size_t>(e1) * ve + e2];
        if (p == 0.0) continue;
        out.add_bigram(bigram_phi(entry.w1, entry.w2, e1, e2, m.fs),
                       p * static_cast<double>(entry.count));
      }
  }
  return out;
}

FeatureVec exact_full_expectation(const LogLinearModel& m) {
  check_full_guard(m);
  const std::uint32_t vf = m.source_vocab_size(), ve = m.target_vocab_size();

  double max_logit = -std::numeric_limits<double>::infinity();
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2)
      for (WordId e1 = 0; e1 < ve; ++e1)
        for (WordId e2 = 0; e2 < ve; ++e2)
          max_logit = std::max(max_logit, log_unnorm(m, f1, f2, e1, e2));
  if (!std::isfinite(max_logit))
    throw DegenerateError("exact full expectation: model has zero total mass");

  FeatureVec out;
  double z = 0.0;
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2)
      for (WordId e1 = 0; e1 < ve; ++e1)
        for (WordId e2 = 0; e2 < ve; ++e2) {
          const double u = std::exp(log_unnorm(m, f1, f2, e1, e2) - max_logit);
          if (u == 0.0) continue;
          z += u;
          out.add_bigram(bigram_phi(f1, f2, e1, e2, m.fs), u);
        }
  out.scale(1.0 / z);
  return out;
}

FeatureVec exact_gradient(const LogLinearModel& m, const BigramTable& src) {
  FeatureVec grad = exact_forced_expectation(m, src);
  const FeatureVec full = exact_full_expectation(m);
  grad.axpy(-static_cast<double>(src.total), full);
  return grad;
}

double exact_loglik(const LogLinearModel& m, const BigramTable& src) {
  check_full_guard(m);
  check_posterior_guard(m);
  const std::uint32_t vf = m.source_vocab_size();

  // log Z_g = logsumexp over f1 f2 of log Z(f1 f2)
  std::vector<double> per_pair(static_cast<std::size_t>(vf) * vf);
  double max_lz = -std::numeric_limits<double>::infinity();
  for (WordId f1 = 0; f1 < vf; ++f1)
    for (WordId f2 = 0; f2 < vf; ++f2) {
      const double lz = log_partition_given(m, f1, f2);
      per_pair[static_cast<std::size_t>(f1) * vf + f2] = lz;
      max_lz = std::max(max_lz, lz);
    }
  double acc = 0.0;
  for (double lz : per_pair) acc += std::exp(lz - max_lz);
  const double log_zg = max_lz + std::log(acc);

  double loglik = 0.0;
  for (const auto& entry : src.sorted())
    loglik += static_cast<double>(entry.count) *
              (per_pair[static_cast<std::size_t>(entry.w1) * vf + entry.w2] - log_zg);
  return loglik;
}

}  // namespace decipher
