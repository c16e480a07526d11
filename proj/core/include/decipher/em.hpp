#pragma once

#include <iosfwd>
#include <vector>

#include "decipher/bigram_lm.hpp"
#include "decipher/corpus.hpp"

namespace decipher {

// Dense channel model p(f | e): rows indexed by target word, each row a
// distribution over the source vocabulary.
struct TranslationTable {
  std::uint32_t n_target = 0;  // rows (e)
  std::uint32_t n_source = 0;  // cols (f)
  std::vector<double> probs;   // row-major

  double at(WordId e, WordId f) const { return probs[static_cast<std::size_t>(e) * n_source + f]; }
  double& at(WordId e, WordId f) { return probs[static_cast<std::size_t>(e) * n_source + f]; }
};

// Uniform initialization: every entry 1 / |V_F|.
TranslationTable em_init(const Vocab& source, const Vocab& target);

struct EmStep {
  TranslationTable table;
  double loglik;  // of the observed bigrams under the INPUT table
};

// One exact EM iteration over the generative chain
//   p(f1 f2) = sum_{e1 e2} p(e1 e2) p(f1|e1) p(f2|e2)
// E-step posteriors are count-weighted; M-step renormalizes per target word.
// Throws DegenerateError when some observed bigram has zero posterior mass
// (possible only with an unsmoothed LM) and SizeError for vocabularies too
// large to hold the dense tables.
EmStep em_iterate(const TranslationTable& table, const BigramTable& src, const BigramLM& lm,
                  int threads = 1);

struct EmRun {
  TranslationTable table;
  std::vector<double> loglik_trace;  // one entry per iteration
  std::vector<double> seconds;       // wall time per iteration
};

EmRun run_em(const TranslationTable& init, const BigramTable& src, const BigramLM& lm,
             int iterations, int threads = 1);

// TSV dump `e <TAB> f <TAB> p(f|e)`, rows with p < 1e-6 omitted.
void save_ttable_tsv(std::ostream& out, const TranslationTable& table, const Vocab& source,
                     const Vocab& target);
TranslationTable load_ttable_tsv(std::istream& in, const Vocab& source, const Vocab& target);

}  // namespace decipher
