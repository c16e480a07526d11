#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "decipher/bigram_lm.hpp"
#include "decipher/em.hpp"
#include "decipher/features.hpp"

namespace decipher {

// Total source -> target word mapping induced by a trained model.
struct Lexicon {
  std::vector<std::pair<std::string, std::string>> entries;  // sorted by source word
};

struct GoldLexicon {
  std::unordered_map<std::string, std::string> map;
};

// EM models: f -> argmax_e p(f|e). Ties break toward the lowest target id.
Lexicon extract_lexicon(const TranslationTable& table, const Vocab& source, const Vocab& target);

// Log-linear models: f -> argmax_e of the learned unigram score
// w(f,e) + ortho_weight * [ortho(f,e)]. Ties break toward the lowest target id.
Lexicon extract_lexicon(const WeightVector& w, const FeatureSpace& fs);

// 100 * |{f : lex(f) = gold(f)}| / |gold|. Entries named in `ignore` are not
// evaluated. Throws CoverageError (listing the words) if an evaluated source
// word is missing from the gold lexicon.
double accuracy(const Lexicon& lex, const GoldLexicon& gold,
                const std::unordered_set<std::string>& ignore = {});

// log-space emission potential log phi(e, f); -inf allowed
using LogEmission = std::function<double(WordId e, WordId f)>;

LogEmission em_log_emission(const TranslationTable& table);
LogEmission ll_log_emission(const WeightVector& w, const FeatureSpace& fs);

// Max-product decoding over the target chain: start weights are the LM
// first-slot marginals, transitions the LM conditionals. Throws Error on a
// source token outside the vocabulary (no fallback).
std::vector<std::string> viterbi_decode(const std::vector<std::string>& sentence,
                                        const LogEmission& log_emission, const Vocab& source,
                                        const BigramLM& lm);

// Corpus-level BLEU in [0, 100]: uniform weights over n-gram orders
// 1..min(4, shortest reference length), with brevity penalty.
double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::string>>& references);

void save_lexicon_tsv(std::ostream& out, const Lexicon& lex);
Lexicon load_lexicon_tsv(std::istream& in);
void save_gold_tsv(std::ostream& out, const GoldLexicon& gold);
GoldLexicon load_gold_tsv(std::istream& in);

}  // namespace decipher
