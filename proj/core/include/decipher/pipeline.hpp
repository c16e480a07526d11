#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "decipher/trainer.hpp"

namespace decipher {

enum class Method { Em, LlGibbs, LlImh, LlCd };

std::string method_string(Method m);
std::optional<Method> parse_method(const std::string& name);

struct RunConfig {
  std::string source_path;
  std::string target_path;
  std::string gold_path;    // optional; enables lexicon accuracy
  std::string out_dir;

  Method method = Method::LlCd;
  SamplerConfig sampler;    // iterations, samples, lr, p_backoff, refresh, seed, threads

  double lm_smoothing = 0.1;
  bool ortho = true;
  double ortho_threshold = 0.3;
  bool keep_punct = false;

  // wall-clock fields in trace.jsonl / metrics.json are written as 0 unless
  // enabled, keeping default outputs byte-identical across reruns
  bool timings = false;

  std::string decode_path;  // optional; held-out source sentences to decode
  std::string refs_path;    // optional; references for BLEU over the decode

  void validate() const;  // throws ValidationError
};

struct PipelineResult {
  std::string method;
  int iterations = 0;
  int samples = 0;
  std::optional<double> accuracy;
  std::optional<double> bleu_score;
  double seconds_total = 0.0;     // measured; serialized per the timings flag
  double seconds_per_iter = 0.0;
  std::string lexicon_path;
  std::string metrics_path;
  std::string trace_path;
};

// ingest -> lm -> init -> train -> lexicon -> accuracy (+ optional decode/BLEU).
// Writes lexicon.tsv, metrics.json, trace.jsonl and the model dump
// (weights.tsv or ttable.tsv) under out_dir.
PipelineResult run_pipeline(const RunConfig& cfg);

struct CompareRow {
  std::string method;
  double seconds_per_iter = 0.0;
  double accuracy = 0.0;
};

// Runs every config (each in a method-named subdirectory of its out_dir) and
// collects the Table-style {method, time, accuracy} rows.
std::vector<CompareRow> compare_methods(const std::vector<RunConfig>& configs);
void write_compare_tsv(std::ostream& out, const std::vector<CompareRow>& rows);

// token/bigram summary of one corpus as a JSON object string
std::string ingest_summary(const std::string& input_path, const std::string& lang_tag,
                           bool keep_punct);

}  // namespace decipher
