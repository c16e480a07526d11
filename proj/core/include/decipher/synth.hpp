#pragma once

#include <optional>

#include "decipher/corpus.hpp"
#include "decipher/evaluate.hpp"
#include "decipher/util.hpp"

namespace decipher {

inline constexpr const char* kUnkToken = "<unk>";

enum class CipherMode {
  Opaque,   // random nonce strings; orthography carries no signal
  Cognate,  // single-edit variants; gold pairs stay orthographically close
};

struct CipherSpec {
  CipherMode mode = CipherMode::Cognate;
  std::uint64_t rng_seed = 1;
  std::optional<std::uint32_t> vocab_limit;  // keep the most frequent words
};

struct CipherInstance {
  Corpus source;     // every sentence rewritten through the cipher
  GoldLexicon gold;  // cipher word -> plaintext word, bijective over kept words
};

// Builds a 1:1 substitution over the (optionally frequency-truncated) target
// vocabulary and rewrites every sentence. Out-of-budget words become
// kUnkToken, which is excluded from the gold lexicon.
// Throws GenerationError if collision-free outputs cannot be found.
CipherInstance make_cipher(const Corpus& target, const CipherSpec& spec);

// Contiguous prefix/suffix split with no shared sentences; sizes differ by at
// most one at ratio 0.5. Throws std::invalid_argument if either part would be
// empty.
std::pair<Corpus, Corpus> split_disjoint(const Corpus& corpus, double ratio);

}  // namespace decipher
