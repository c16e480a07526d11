#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "decipher/util.hpp"

namespace decipher {

// Tokenized monolingual text, one token sequence per input line. Tokens are
// lowercase, non-empty, whitespace-free; sentence order follows the input.
struct Corpus {
  std::vector<std::vector<std::string>> sentences;
  std::string lang_tag;

  std::size_t num_tokens() const;
};

// Distinct tokens in first-occurrence order; word <-> dense id bijection.
class Vocab {
 public:
  WordId add(const std::string& word);           // inserts if absent
  std::optional<WordId> id(const std::string& word) const;
  const std::string& word(WordId id) const;
  std::uint32_t size() const { return static_cast<std::uint32_t>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

// Counts of adjacent within-sentence token pairs. No boundary padding;
// single-token sentences contribute nothing.
struct BigramTable {
  std::unordered_map<std::uint64_t, std::uint32_t> counts;
  std::uint64_t total = 0;  // sum of counts (bigram tokens)

  // entries sorted by (w1, w2) for deterministic iteration
  struct Entry {
    WordId w1, w2;
    std::uint32_t count;
  };
  std::vector<Entry> sorted() const;

  std::size_t num_unique() const { return counts.size(); }
};

struct TokenizeOptions {
  bool strip_punct = true;
  bool lowercase = true;
};

// Splits a single line into normalized tokens (exposed for tests and synth).
std::vector<std::string> tokenize_line(std::string_view line, const TokenizeOptions& opts);

// Reads UTF-8 text, one sentence per line; empty lines are skipped.
// Throws DecodeError with a line number on malformed input.
Corpus load_corpus(std::istream& in, std::string lang_tag = "",
                   const TokenizeOptions& opts = {});
Corpus load_corpus_file(const std::string& path, std::string lang_tag = "",
                        const TokenizeOptions& opts = {});

Vocab build_vocab(const Corpus& corpus);

// Throws Error if a corpus token is missing from the vocab.
BigramTable extract_bigrams(const Corpus& corpus, const Vocab& vocab);

}  // namespace decipher
