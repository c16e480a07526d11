#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decipher/sampler.hpp"

namespace decipher {

enum class TrainMethod { Gibbs, ImhGibbs, ContrastiveDivergence };

std::string method_name(TrainMethod method);

struct IterationStats {
  double seconds = 0.0;                 // wall time for the whole iteration
  double sampling_seconds = 0.0;        // sampling only (excludes proposal refresh)
  double grad_norm = 0.0;               // L2 norm of the applied gradient estimate
  std::optional<double> accept_rate;    // IMH acceptance rate, when IMH is used
  std::size_t n_weights = 0;            // stored translation features after the update
};

struct TrainRecord {
  std::vector<IterationStats> iterations;
};

struct TrainResult {
  LogLinearModel model;
  TrainRecord record;
};

// Runs cfg.iterations gradient-ascent passes over the observed bigrams.
//   Gibbs:   forced expectation via gibbs_forced, full via gibbs_full
//   ImhGibbs: forced via imh_posterior, full via gibbs_full
//   CD:       per-bigram batches of cd_update, applied between batches
// The corpus gradient is (sum of count-weighted forced terms) - N * full.
// Proposals are rebuilt every cfg.qs_refresh_period iterations. Translation
// features first seen in samples enter the weight vector at zero.
// Throws DivergenceError (with the iteration) if any weight goes non-finite.
TrainResult train(LogLinearModel model, const BigramTable& src, TrainMethod method,
                  const SamplerConfig& cfg);

}  // namespace decipher
