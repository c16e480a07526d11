#include "decipher/trainer.hpp"

#include <chrono>
#include <cmath>

namespace decipher {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void apply_update(WeightVector& w, const FeatureVec& delta, bool ortho_enabled) {
  // insertion through operator[] realizes "observed during sampling" keys at 0
  for (const auto& [key, value] : delta.translation) w.translation[key] += value;
  if (ortho_enabled) w.ortho_weight += delta.ortho;
}

void check_finite(const WeightVector& w, int iteration) {
  if (!std::isfinite(w.ortho_weight))
    throw DivergenceError("training diverged: non-finite orthographic weight at iteration " +
                              std::to_string(iteration),
                          iteration);
  for (const auto& [_, value] : w.translation)
    if (!std::isfinite(value))
      throw DivergenceError(
          "training diverged: non-finite translation weight at iteration " +
              std::to_string(iteration),
          iteration);
}

// Count-weighted forced expectation, parallel over unique bigrams. Chunk
// partials merge in chunk order, and every bigram owns a derived rng stream,
// so the result is identical for any thread count.
struct ForcedPass {
  FeatureVec sum;       // sum over bigrams of count * mean Phi
  long long proposals = 0;
  long long accepted = 0;
};

template <typename PerBigram>
ForcedPass forced_pass(const std::vector<BigramTable::Entry>& entries, int threads,
                       const PerBigram& per_bigram) {
  const std::size_t chunk_size = 16;
  const std::size_t n_chunks = (entries.size() + chunk_size - 1) / chunk_size;
  std::vector<ForcedPass> partials(n_chunks);
  parallel_chunks(entries.size(), chunk_size, threads, [&](std::size_t begin, std::size_t end) {
    ForcedPass& part = partials[begin / chunk_size];
    for (std::size_t i = begin; i < end; ++i) per_bigram(i, entries[i], part);
  });
  ForcedPass out;
  for (ForcedPass& part : partials) {
    out.sum.axpy(1.0, part.sum);
    out.proposals += part.proposals;
    out.accepted += part.accepted;
  }
  return out;
}

}  // namespace

std::string method_name(TrainMethod method) {
  switch (method) {
    case TrainMethod::Gibbs:
      return "ll-gibbs";
    case TrainMethod::ImhGibbs:
      return "ll-imh";
    case TrainMethod::ContrastiveDivergence:
      return "ll-cd";
  }
  return "unknown";
}

TrainResult train(LogLinearModel model, const BigramTable& src, TrainMethod method,
                  const SamplerConfig& cfg) {
  cfg.validate();
  const auto entries = src.sorted();
  const double total_tokens = static_cast<double>(src.total);
  const Rng master(cfg.rng_seed);
  const bool use_cd = method == TrainMethod::ContrastiveDivergence;

  TrainResult out;
  out.record.iterations.reserve(static_cast<std::size_t>(cfg.iterations));

  Proposal prop_tgt, prop_src;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const auto iter_t0 = Clock::now();
    if (iter % cfg.qs_refresh_period == 0) {
      prop_tgt = Proposal::build(model.weights, model.fs, cfg.p_backoff, /*source_side=*/false);
      if (use_cd)
        prop_src = Proposal::build(model.weights, model.fs, cfg.p_backoff, /*source_side=*/true);
    }
    const Rng iter_rng = master.derive(static_cast<std::uint64_t>(iter) + 1);
    const auto sample_t0 = Clock::now();

    IterationStats stats;
    if (use_cd) {
      // serialized per-bigram batches: each batch samples against the current
      // weights and applies its summed delta before the next batch starts
      FeatureVec applied_total;
      long long proposals = 0, accepted = 0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        Rng rng = iter_rng.derive(i);
        FeatureVec batch;
        for (int k = 0; k < cfg.n_samples; ++k) {
          const CdDelta d =
              cd_update(model, prop_tgt, prop_src, entries[i].w1, entries[i].w2, cfg, rng);
          batch.axpy(1.0, d.delta);
          proposals += d.proposals;
          accepted += d.accepted;
        }
        apply_update(model.weights, batch, model.fs.ortho_enabled());
        applied_total.axpy(1.0, batch);
      }
      stats.grad_norm = applied_total.l2_norm() / cfg.learning_rate;
      stats.accept_rate =
          proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    } else {
      const bool use_imh = method == TrainMethod::ImhGibbs;
      ForcedPass forced =
          forced_pass(entries, cfg.threads,
                      [&](std::size_t i, const BigramTable::Entry& entry, ForcedPass& part) {
                        Rng rng = iter_rng.derive(i);
                        const double c = static_cast<double>(entry.count);
                        if (use_imh) {
                          const ImhResult r =
                              imh_posterior(model, prop_tgt, entry.w1, entry.w2, cfg.n_samples, rng);
                          part.sum.axpy(c, r.mean_phi);
                          part.proposals += cfg.n_samples;
                          part.accepted += r.accepted;
                        } else {
                          const GibbsForcedResult r =
                              gibbs_forced(model, prop_tgt, entry.w1, entry.w2, cfg.n_samples, rng);
                          part.sum.axpy(c, r.mean_phi);
                        }
                      });

      Rng full_rng = iter_rng.derive(0x46554c4cull);  // distinct stream for the full chain
      const GibbsFullResult full = gibbs_full(model, prop_tgt, cfg.n_samples, full_rng);

      FeatureVec grad = std::move(forced.sum);
      grad.axpy(-total_tokens, full.mean_phi);
      grad.scale(cfg.learning_rate);
      apply_update(model.weights, grad, model.fs.ortho_enabled());
      stats.grad_norm = grad.l2_norm() / cfg.learning_rate;
      if (use_imh)
        stats.accept_rate = forced.proposals > 0 ? static_cast<double>(forced.accepted) /
                                                       static_cast<double>(forced.proposals)
                                                 : 0.0;
    }

    check_finite(model.weights, iter);
    stats.sampling_seconds = elapsed(sample_t0);
    stats.seconds = elapsed(iter_t0);
    stats.n_weights = model.weights.size();
    out.record.iterations.push_back(std::move(stats));
  }

  out.model = std::move(model);
  return out;
}

}  // namespace decipher
