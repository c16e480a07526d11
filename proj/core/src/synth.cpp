#include "decipher/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "decipher/features.hpp"

namespace decipher {
namespace {

constexpr int kMaxRetries = 100;

const std::u32string kConsonants = U"bcdfghjklmnprstvz";
const std::u32string kVowels = U"aeiou";
const std::u32string kAlphabet = U"abcdefghijklmnopqrstuvwxyz";

std::string random_nonce(Rng& rng) {
  const int syllables = 2 + static_cast<int>(rng.below(3));
  std::u32string word;
  for (int s = 0; s < syllables; ++s) {
    word.push_back(kConsonants[rng.below(static_cast<std::uint32_t>(kConsonants.size()))]);
    word.push_back(kVowels[rng.below(static_cast<std::uint32_t>(kVowels.size()))]);
  }
  return utf8_encode(word);
}

// one random insert or substitute, guaranteed to change the string
std::string random_edit(const std::string& word, Rng& rng) {
  std::u32string w = utf8_decode(word);
  const bool insert = rng.uniform() < 0.5;
  if (insert) {
    const std::size_t pos = rng.below(static_cast<std::uint32_t>(w.size() + 1));
    w.insert(w.begin() + static_cast<std::ptrdiff_t>(pos),
             kAlphabet[rng.below(static_cast<std::uint32_t>(kAlphabet.size()))]);
  } else {
    const std::size_t pos = rng.below(static_cast<std::uint32_t>(w.size()));
    char32_t c;
    do {
      c = kAlphabet[rng.below(static_cast<std::uint32_t>(kAlphabet.size()))];
    } while (c == w[pos]);
    w[pos] = c;
  }
  return utf8_encode(w);
}

}  // namespace

CipherInstance make_cipher(const Corpus& target, const CipherSpec& spec) {
  if (target.sentences.empty()) throw std::invalid_argument("make_cipher: empty target corpus");
  if (spec.vocab_limit && *spec.vocab_limit < 2)
    throw std::invalid_argument("make_cipher: vocab_limit must be >= 2");

  const Vocab vocab = build_vocab(target);
  std::vector<std::uint64_t> freq(vocab.size(), 0);
  for (const auto& sentence : target.sentences)
    for (const auto& token : sentence) ++freq[*vocab.id(token)];

  // keep the most frequent words; ties resolve toward earlier first occurrence
  std::vector<WordId> order(vocab.size());
  for (WordId i = 0; i < vocab.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](WordId a, WordId b) { return freq[a] > freq[b]; });
  std::vector<bool> kept(vocab.size(), true);
  if (spec.vocab_limit && *spec.vocab_limit < vocab.size())
    for (std::size_t i = *spec.vocab_limit; i < order.size(); ++i) kept[order[i]] = false;

  Rng rng(spec.rng_seed);
  std::unordered_set<std::string> used;
  used.insert(kUnkToken);
  std::unordered_map<std::string, std::string> forward;  // plaintext -> cipher

  CipherInstance out;
  for (WordId id = 0; id < vocab.size(); ++id) {
    if (!kept[id]) continue;
    const std::string& word = vocab.word(id);
    std::string cipher_word;
    int attempts = 0;
    for (;;) {
      if (++attempts > kMaxRetries)
        throw GenerationError("make_cipher: no collision-free output for word: " + word);
      cipher_word = spec.mode == CipherMode::Opaque ? random_nonce(rng) : random_edit(word, rng);
      if (used.count(cipher_word)) continue;
      if (spec.mode == CipherMode::Opaque &&
          normalized_edit_distance(cipher_word, word) <= 0.3)
        continue;  // opaque outputs must not look like their plaintext
      break;
    }
    used.insert(cipher_word);
    forward.emplace(word, cipher_word);
    out.gold.map.emplace(cipher_word, word);
  }

  out.source.lang_tag = target.lang_tag.empty() ? "cipher" : target.lang_tag + "-cipher";
  out.source.sentences.reserve(target.sentences.size());
  for (const auto& sentence : target.sentences) {
    std::vector<std::string> rewritten;
    rewritten.reserve(sentence.size());
    for (const auto& token : sentence) {
      auto it = forward.find(token);
      rewritten.push_back(it == forward.end() ? kUnkToken : it->second);
    }
    out.source.sentences.push_back(std::move(rewritten));
  }
  return out;
}

std::pair<Corpus, Corpus> split_disjoint(const Corpus& corpus, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split_disjoint: ratio must be in (0, 1)");
  const std::size_t n = corpus.sentences.size();
  if (n < 2) throw std::invalid_argument("split_disjoint: corpus too small to split");
  std::size_t cut = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(n)));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);

  Corpus a, b;
  a.lang_tag = corpus.lang_tag;
  b.lang_tag = corpus.lang_tag;
  a.sentences.assign(corpus.sentences.begin(),
                     corpus.sentences.begin() + static_cast<std::ptrdiff_t>(cut));
  b.sentences.assign(corpus.sentences.begin() + static_cast<std::ptrdiff_t>(cut),
                     corpus.sentences.end());
  return {std::move(a), std::move(b)};
}

}  // namespace decipher
