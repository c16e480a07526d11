#include "decipher/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "decipher/em.hpp"
#include "decipher/evaluate.hpp"
#include "decipher/synth.hpp"

namespace decipher {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " path not set");
  if (!fs::exists(path)) throw ValidationError(what + " path does not exist: " + path);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  return out;
}

double round_seconds(double seconds, bool timings) { return timings ? seconds : 0.0; }

}  // namespace

std::string method_string(Method m) {
  switch (m) {
    case Method::Em:
      return "em";
    case Method::LlGibbs:
      return "ll-gibbs";
    case Method::LlImh:
      return "ll-imh";
    case Method::LlCd:
      return "ll-cd";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "em") return Method::Em;
  if (name == "ll-gibbs") return Method::LlGibbs;
  if (name == "ll-imh") return Method::LlImh;
  if (name == "ll-cd") return Method::LlCd;
  return std::nullopt;
}

void RunConfig::validate() const {
  require_file(source_path, "source corpus");
  require_file(target_path, "target corpus");
  if (!gold_path.empty()) require_file(gold_path, "gold lexicon");
  if (!decode_path.empty()) require_file(decode_path, "decode corpus");
  if (!refs_path.empty()) require_file(refs_path, "reference corpus");
  if (!refs_path.empty() && decode_path.empty())
    throw ValidationError("references given without a decode corpus");
  if (out_dir.empty()) throw ValidationError("output directory not set");
  if (!(ortho_threshold >= 0.0 && ortho_threshold <= 1.0))
    throw ValidationError("ortho threshold must be in [0, 1]");
  if (lm_smoothing < 0.0) throw ValidationError("lm smoothing must be >= 0");
  try {
    sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  TokenizeOptions tokopts;
  tokopts.strip_punct = !cfg.keep_punct;
  const Corpus source = load_corpus_file(cfg.source_path, "source", tokopts);
  const Corpus target = load_corpus_file(cfg.target_path, "target", tokopts);
  if (source.sentences.empty()) throw ValidationError("source corpus is empty");
  if (target.sentences.empty()) throw ValidationError("target corpus is empty");

  const Vocab source_vocab = build_vocab(source);
  const Vocab target_vocab = build_vocab(target);
  const BigramTable source_bigrams = extract_bigrams(source, source_vocab);
  const BigramTable target_bigrams = extract_bigrams(target, target_vocab);
  const BigramLM lm = train_bigram_lm(target_bigrams, target_vocab, cfg.lm_smoothing);

  PipelineResult result;
  result.method = method_string(cfg.method);
  result.iterations = cfg.sampler.iterations;
  result.samples = cfg.sampler.n_samples;
  const fs::path out_dir(cfg.out_dir);
  result.lexicon_path = (out_dir / "lexicon.tsv").string();
  result.metrics_path = (out_dir / "metrics.json").string();
  result.trace_path = (out_dir / "trace.jsonl").string();

  Lexicon lexicon;
  std::optional<TranslationTable> em_table;
  std::optional<LogLinearModel> ll_model;

  {
    auto trace = open_out(result.trace_path);
    if (cfg.method == Method::Em) {
      EmRun run = run_em(em_init(source_vocab, target_vocab), source_bigrams, lm,
                         cfg.sampler.iterations, cfg.sampler.threads);
      for (std::size_t i = 0; i < run.loglik_trace.size(); ++i) {
        ordered_json row;
        row["iter"] = i;
        row["seconds"] = round_seconds(run.seconds[i], cfg.timings);
        row["loglik"] = run.loglik_trace[i];
        trace << row.dump() << "\n";
      }
      lexicon = extract_lexicon(run.table, source_vocab, target_vocab);
      auto ttable = open_out(out_dir / "ttable.tsv");
      save_ttable_tsv(ttable, run.table, source_vocab, target_vocab);
      em_table = std::move(run.table);
    } else {
      LogLinearModel model;
      model.fs = FeatureSpace(source_vocab, target_vocab, cfg.ortho, cfg.ortho_threshold);
      model.lm = lm;
      InitConfig init;
      init.ortho_enabled = cfg.ortho;
      init.threshold = cfg.ortho_threshold;
      model.weights = init_weights(model.fs, init);

      const TrainMethod method = cfg.method == Method::LlGibbs ? TrainMethod::Gibbs
                                 : cfg.method == Method::LlImh
                                     ? TrainMethod::ImhGibbs
                                     : TrainMethod::ContrastiveDivergence;
      TrainResult trained = train(std::move(model), source_bigrams, method, cfg.sampler);
      for (std::size_t i = 0; i < trained.record.iterations.size(); ++i) {
        const IterationStats& it = trained.record.iterations[i];
        ordered_json row;
        row["iter"] = i;
        row["seconds"] = round_seconds(it.seconds, cfg.timings);
        row["grad_norm"] = it.grad_norm;
        if (it.accept_rate)
          row["accept_rate"] = *it.accept_rate;
        else
          row["accept_rate"] = nullptr;
        row["n_weights"] = it.n_weights;
        trace << row.dump() << "\n";
      }
      lexicon = extract_lexicon(trained.model.weights, trained.model.fs);
      auto weights = open_out(out_dir / "weights.tsv");
      save_weights_tsv(weights, trained.model.weights, trained.model.fs);
      ll_model = std::move(trained.model);
    }
  }

  {
    auto lex_out = open_out(result.lexicon_path);
    save_lexicon_tsv(lex_out, lexicon);
  }

  if (!cfg.gold_path.empty()) {
    std::ifstream gold_in(cfg.gold_path, std::ios::binary);
    const GoldLexicon gold = load_gold_tsv(gold_in);
    result.accuracy = accuracy(lexicon, gold, {kUnkToken});
  }

  if (!cfg.decode_path.empty()) {
    const Corpus decode_corpus = load_corpus_file(cfg.decode_path, "decode", tokopts);
    const LogEmission emission = cfg.method == Method::Em
                                     ? em_log_emission(*em_table)
                                     : ll_log_emission(ll_model->weights, ll_model->fs);
    std::vector<std::vector<std::string>> outputs;
    outputs.reserve(decode_corpus.sentences.size());
    auto decoded = open_out(out_dir / "decoded.txt");
    for (const auto& sentence : decode_corpus.sentences) {
      outputs.push_back(viterbi_decode(sentence, emission, source_vocab, lm));
      for (std::size_t i = 0; i < outputs.back().size(); ++i)
        decoded << (i ? " " : "") << outputs.back()[i];
      decoded << "\n";
    }
    if (!cfg.refs_path.empty()) {
      const Corpus refs = load_corpus_file(cfg.refs_path, "refs", tokopts);
      if (refs.sentences.size() != outputs.size())
        throw ValidationError("reference corpus size does not match decode corpus");
      result.bleu_score = bleu(outputs, refs.sentences);
    }
  }

  result.seconds_total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.seconds_per_iter = result.seconds_total / std::max(1, cfg.sampler.iterations);

  ordered_json metrics;
  metrics["method"] = result.method;
  metrics["iterations"] = result.iterations;
  metrics["samples"] = result.samples;
  if (result.accuracy)
    metrics["accuracy"] = *result.accuracy;
  else
    metrics["accuracy"] = nullptr;
  if (result.bleu_score) metrics["bleu"] = *result.bleu_score;
  metrics["seconds_total"] = round_seconds(result.seconds_total, cfg.timings);
  metrics["seconds_per_iter"] = round_seconds(result.seconds_per_iter, cfg.timings);
  auto metrics_out = open_out(result.metrics_path);
  metrics_out << metrics.dump(2) << "\n";

  return result;
}

std::vector<CompareRow> compare_methods(const std::vector<RunConfig>& configs) {
  if (configs.size() < 2)
    throw ValidationError("compare requires at least two configurations");
  std::vector<CompareRow> rows;
  rows.reserve(configs.size());
  for (const RunConfig& base : configs) {
    RunConfig cfg = base;
    cfg.out_dir = (fs::path(base.out_dir) / method_string(base.method)).string();
    const PipelineResult r = run_pipeline(cfg);
    CompareRow row;
    row.method = r.method;
    row.seconds_per_iter = cfg.timings ? r.seconds_per_iter : 0.0;
    row.accuracy = r.accuracy.value_or(0.0);
    rows.push_back(row);
  }
  return rows;
}

void write_compare_tsv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "method\tseconds_per_iter\taccuracy\n";
  for (const auto& row : rows)
    out << row.method << '\t' << row.seconds_per_iter << '\t' << row.accuracy << '\n';
}

std::string ingest_summary(const std::string& input_path, const std::string& lang_tag,
                           bool keep_punct) {
  require_file(input_path, "input corpus");
  TokenizeOptions opts;
  opts.strip_punct = !keep_punct;
  const Corpus corpus = load_corpus_file(input_path, lang_tag, opts);
  const Vocab vocab = build_vocab(corpus);
  const BigramTable bigrams = extract_bigrams(corpus, vocab);
  ordered_json summary;
  summary["lang"] = lang_tag;
  summary["sentences"] = corpus.sentences.size();
  summary["tokens"] = corpus.num_tokens();
  summary["vocab"] = vocab.size();
  summary["unique_bigrams"] = bigrams.num_unique();
  summary["bigram_tokens"] = bigrams.total;
  return summary.dump(2);
}

}  // namespace decipher
