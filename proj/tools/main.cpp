// decipher: word-level translation mappings from two monolingual corpora.
//
// Subcommands: ingest, synth, train, evaluate, decode, compare.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "decipher/em.hpp"
#include "decipher/evaluate.hpp"
#include "decipher/pipeline.hpp"
#include "decipher/synth.hpp"

namespace fs = std::filesystem;
using namespace decipher;

namespace {

constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct TrainArgs {
  RunConfig cfg;
  std::string method = "ll-cd";
  bool no_ortho = false;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--source", args.cfg.source_path, "source (ciphertext) corpus")->required();
  cmd->add_option("--target", args.cfg.target_path, "target corpus for the language model")
      ->required();
  cmd->add_option("--gold", args.cfg.gold_path, "gold lexicon TSV for accuracy");
  cmd->add_option("--out-dir", args.cfg.out_dir, "artifact directory")->required();
  cmd->add_option("--method", args.method, "em | ll-gibbs | ll-imh | ll-cd")
      ->check(CLI::IsMember({"em", "ll-gibbs", "ll-imh", "ll-cd"}));
  cmd->add_option("--iters", args.cfg.sampler.iterations, "training iterations");
  cmd->add_option("--samples", args.cfg.sampler.n_samples, "samples per bigram per iteration");
  cmd->add_option("--lr", args.cfg.sampler.learning_rate, "gradient step size");
  cmd->add_option("--pb", args.cfg.sampler.p_backoff, "proposal back-off probability");
  cmd->add_option("--refresh", args.cfg.sampler.qs_refresh_period,
                  "proposal rebuild period (iterations)");
  cmd->add_option("--seed", args.cfg.sampler.rng_seed, "random seed")->envname("DECIPHER_SEED");
  cmd->add_option("--threads", args.cfg.sampler.threads, "worker thread cap");
  cmd->add_option("--smoothing", args.cfg.lm_smoothing, "bigram LM add-k smoothing");
  cmd->add_option("--threshold", args.cfg.ortho_threshold,
                  "normalized edit distance threshold for the orthographic feature");
  cmd->add_flag("--no-ortho", args.no_ortho, "disable orthographic features");
  cmd->add_flag("--keep-punct", args.cfg.keep_punct, "keep punctuation during tokenization");
  cmd->add_flag("--timings", args.cfg.timings,
                "record wall-clock fields (outputs are no longer reproducible)");
  cmd->add_option("--decode", args.cfg.decode_path, "held-out source corpus to Viterbi-decode");
  cmd->add_option("--refs", args.cfg.refs_path, "references for BLEU over --decode");
  cmd->set_config("--config", "", "read options from an INI/TOML file");
}

RunConfig finish_train_args(TrainArgs& args) {
  const auto method = parse_method(args.method);
  if (!method) throw ValidationError("unknown method: " + args.method);
  args.cfg.method = *method;
  args.cfg.ortho = !args.no_ortho;
  return args.cfg;
}

int run_ingest(const std::string& input, const std::string& lang, bool keep_punct) {
  std::cout << ingest_summary(input, lang, keep_punct) << "\n";
  return 0;
}

int run_synth(const std::string& input, const std::string& mode_name, std::uint64_t seed,
              const std::string& out_dir, std::optional<std::uint32_t> vocab_limit,
              double split_ratio) {
  if (!fs::exists(input)) throw ValidationError("input corpus does not exist: " + input);
  CipherSpec spec;
  if (mode_name == "opaque")
    spec.mode = CipherMode::Opaque;
  else if (mode_name == "cognate")
    spec.mode = CipherMode::Cognate;
  else
    throw ValidationError("unknown cipher mode: " + mode_name);
  spec.rng_seed = seed;
  spec.vocab_limit = vocab_limit;

  const Corpus corpus = load_corpus_file(input);
  const auto [plain_part, target_part] = split_disjoint(corpus, split_ratio);
  const CipherInstance instance = make_cipher(plain_part, spec);

  fs::create_directories(out_dir);
  auto write_corpus = [](const fs::path& path, const Corpus& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    for (const auto& sentence : c.sentences) {
      for (std::size_t i = 0; i < sentence.size(); ++i) out << (i ? " " : "") << sentence[i];
      out << "\n";
    }
  };
  write_corpus(fs::path(out_dir) / "source.txt", instance.source);
  write_corpus(fs::path(out_dir) / "target.txt", target_part);
  write_corpus(fs::path(out_dir) / "reference.txt", plain_part);
  std::ofstream gold_out(fs::path(out_dir) / "gold.tsv", std::ios::binary);
  save_gold_tsv(gold_out, instance.gold);

  std::cout << "wrote source.txt (" << instance.source.sentences.size() << " sentences), "
            << "target.txt (" << target_part.sentences.size() << " sentences), gold.tsv ("
            << instance.gold.map.size() << " pairs) to " << out_dir << "\n";
  return 0;
}

int run_evaluate(const std::string& lexicon_path, const std::string& gold_path) {
  if (!fs::exists(lexicon_path))
    throw ValidationError("lexicon path does not exist: " + lexicon_path);
  if (!fs::exists(gold_path)) throw ValidationError("gold path does not exist: " + gold_path);
  std::ifstream lex_in(lexicon_path, std::ios::binary);
  std::ifstream gold_in(gold_path, std::ios::binary);
  const Lexicon lex = load_lexicon_tsv(lex_in);
  const GoldLexicon gold = load_gold_tsv(gold_in);
  const double acc = accuracy(lex, gold, {kUnkToken});
  std::cout << "{\"accuracy\": " << acc << "}\n";
  return 0;
}

struct DecodeArgs {
  std::string source_path, target_path, weights_path, ttable_path, output_path, refs_path;
  double smoothing = 0.1;
  double threshold = 0.3;
  bool no_ortho = false;
  bool keep_punct = false;
};

int run_decode(const DecodeArgs& args) {
  if (!fs::exists(args.source_path))
    throw ValidationError("source path does not exist: " + args.source_path);
  if (!fs::exists(args.target_path))
    throw ValidationError("target path does not exist: " + args.target_path);
  if (args.weights_path.empty() == args.ttable_path.empty())
    throw ValidationError("decode needs exactly one of --weights or --ttable");

  TokenizeOptions opts;
  opts.strip_punct = !args.keep_punct;
  const Corpus source = load_corpus_file(args.source_path, "source", opts);
  const Corpus target = load_corpus_file(args.target_path, "target", opts);
  const Vocab source_vocab = build_vocab(source);
  const Vocab target_vocab = build_vocab(target);
  const BigramLM lm =
      train_bigram_lm(extract_bigrams(target, target_vocab), target_vocab, args.smoothing);

  // keep whichever model backs the emission alive for the decode loop
  std::optional<TranslationTable> ttable;
  std::optional<WeightVector> weights;
  std::optional<FeatureSpace> feature_space;
  LogEmission emission;
  if (!args.ttable_path.empty()) {
    std::ifstream in(args.ttable_path, std::ios::binary);
    if (!in) throw ValidationError("cannot read ttable: " + args.ttable_path);
    ttable = load_ttable_tsv(in, source_vocab, target_vocab);
    emission = em_log_emission(*ttable);
  } else {
    std::ifstream in(args.weights_path, std::ios::binary);
    if (!in) throw ValidationError("cannot read weights: " + args.weights_path);
    weights = load_weights_tsv(in, source_vocab, target_vocab);
    feature_space = FeatureSpace(source_vocab, target_vocab, !args.no_ortho, args.threshold);
    emission = ll_log_emission(*weights, *feature_space);
  }

  std::ostream* out = &std::cout;
  std::ofstream file_out;
  if (!args.output_path.empty()) {
    file_out.open(args.output_path, std::ios::binary);
    if (!file_out) throw Error("cannot write file: " + args.output_path);
    out = &file_out;
  }
  std::vector<std::vector<std::string>> outputs;
  outputs.reserve(source.sentences.size());
  for (const auto& sentence : source.sentences) {
    outputs.push_back(viterbi_decode(sentence, emission, source_vocab, lm));
    for (std::size_t i = 0; i < outputs.back().size(); ++i)
      (*out) << (i ? " " : "") << outputs.back()[i];
    (*out) << "\n";
  }
  if (!args.refs_path.empty()) {
    const Corpus refs = load_corpus_file(args.refs_path, "refs", opts);
    if (refs.sentences.size() != outputs.size())
      throw ValidationError("reference corpus size does not match decoded corpus");
    std::cout << "{\"bleu\": " << bleu(outputs, refs.sentences) << "}\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"word-level decipherment of monolingual corpora"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_input, ingest_lang = "und";
  bool ingest_keep_punct = false;
  auto* ingest = app.add_subcommand("ingest", "tokenize a corpus and print summary JSON");
  ingest->add_option("--input", ingest_input, "UTF-8 text, one sentence per line")->required();
  ingest->add_option("--lang", ingest_lang, "language tag");
  ingest->add_flag("--keep-punct", ingest_keep_punct, "keep punctuation");

  // synth
  std::string synth_input, synth_mode = "cognate", synth_out;
  std::uint64_t synth_seed = 1;
  std::optional<std::uint32_t> synth_vocab_limit;
  double synth_split = 0.5;
  auto* synth = app.add_subcommand("synth", "generate a synthetic decipherment instance");
  synth->add_option("--input", synth_input, "plaintext corpus")->required();
  synth->add_option("--mode", synth_mode, "cognate | opaque")
      ->check(CLI::IsMember({"cognate", "opaque"}));
  synth->add_option("--seed", synth_seed, "random seed")->envname("DECIPHER_SEED");
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_option("--vocab-limit", synth_vocab_limit, "keep only the most frequent words");
  synth->add_option("--split", synth_split, "plaintext/target split ratio");

  // train
  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "run the decipherment pipeline");
  add_train_options(train_cmd, train_args);

  // evaluate
  std::string eval_lexicon, eval_gold;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a lexicon against a gold TSV");
  evaluate_cmd->add_option("--lexicon", eval_lexicon, "lexicon TSV")->required();
  evaluate_cmd->add_option("--gold", eval_gold, "gold TSV")->required();

  // decode
  DecodeArgs decode_args;
  auto* decode_cmd = app.add_subcommand("decode", "Viterbi-decode source sentences");
  decode_cmd->add_option("--source", decode_args.source_path, "source sentences")->required();
  decode_cmd->add_option("--target", decode_args.target_path, "target corpus for the LM")
      ->required();
  decode_cmd->add_option("--weights", decode_args.weights_path, "log-linear weights TSV");
  decode_cmd->add_option("--ttable", decode_args.ttable_path, "EM translation table TSV");
  decode_cmd->add_option("--output", decode_args.output_path, "decoded sentences (default stdout)");
  decode_cmd->add_option("--refs", decode_args.refs_path, "references; prints BLEU");
  decode_cmd->add_option("--smoothing", decode_args.smoothing, "bigram LM add-k smoothing");
  decode_cmd->add_option("--threshold", decode_args.threshold, "orthographic threshold");
  decode_cmd->add_flag("--no-ortho", decode_args.no_ortho, "disable orthographic features");
  decode_cmd->add_flag("--keep-punct", decode_args.keep_punct, "keep punctuation");

  // compare
  TrainArgs compare_args;
  std::vector<std::string> compare_methods_arg;
  std::string compare_out;
  auto* compare_cmd = app.add_subcommand("compare", "run several methods and tabulate results");
  add_train_options(compare_cmd, compare_args);
  compare_cmd->add_option("--methods", compare_methods_arg, "comma-separated methods")
      ->delimiter(',')
      ->required();
  compare_cmd->add_option("--out", compare_out, "TSV output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return run_ingest(ingest_input, ingest_lang, ingest_keep_punct);
    if (*synth)
      return run_synth(synth_input, synth_mode, synth_seed, synth_out, synth_vocab_limit,
                       synth_split);
    if (*train_cmd) {
      const RunConfig cfg = finish_train_args(train_args);
      const PipelineResult result = run_pipeline(cfg);
      std::cout << "wrote " << result.lexicon_path << ", " << result.metrics_path << ", "
                << result.trace_path << "\n";
      if (result.accuracy) std::cout << "accuracy: " << *result.accuracy << "\n";
      if (result.bleu_score) std::cout << "bleu: " << *result.bleu_score << "\n";
      return 0;
    }
    if (*evaluate_cmd) return run_evaluate(eval_lexicon, eval_gold);
    if (*decode_cmd) return run_decode(decode_args);
    if (*compare_cmd) {
      std::vector<RunConfig> configs;
      for (const auto& name : compare_methods_arg) {
        TrainArgs per_method = compare_args;
        per_method.method = name;
        configs.push_back(finish_train_args(per_method));
      }
      const auto rows = compare_methods(configs);
      if (compare_out.empty()) {
        write_compare_tsv(std::cout, rows);
      } else {
        std::ofstream out(compare_out, std::ios::binary);
        if (!out) throw Error("cannot write file: " + compare_out);
        write_compare_tsv(out, rows);
      }
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
