#include "decipher/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace decipher {
namespace {

// ASCII punctuation plus the marks common in Spanish/French text.
bool is_punct_cp(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<unsigned char>(c)) != 0;
  switch (c) {
    case U'¡':  // inverted exclamation
    case U'¿':  // inverted question
    case U'«':  // «
    case U'»':  // »
    case U'–':  // en dash
    case U'—':  // em dash
    case U'‘':
    case U'’':
    case U'“':
    case U'”':
    case U'…':  // ellipsis
      return true;
    default:
      return false;
  }
}

char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 uppercase letters (accented Spanish/French characters)
  if (c >= 0xc0 && c <= 0xde && c != 0xd7) return c + 32;
  return c;
}

}  // namespace

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

WordId Vocab::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  const WordId id = static_cast<WordId>(words_.size());
  words_.push_back(word);
  index_.emplace(word, id);
  return id;
}

std::optional<WordId> Vocab::id(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::word(WordId id) const {
  if (id >= words_.size()) throw std::out_of_range("word id out of range");
  return words_[id];
}

std::vector<BigramTable::Entry> BigramTable::sorted() const {
  std::vector<Entry> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts)
    out.push_back({pair_first(key), pair_second(key), count});
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return a.w1 != b.w1 ? a.w1 < b.w1 : a.w2 < b.w2;
  });
  return out;
}

std::vector<std::string> tokenize_line(std::string_view line, const TokenizeOptions& opts) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) {
      std::u32string tok = utf8_decode(line.substr(pos, end - pos));
      if (opts.lowercase)
        for (auto& c : tok) c = fold_case(c);
      if (opts.strip_punct) {
        std::size_t b = 0, e = tok.size();
        while (b < e && is_punct_cp(tok[b])) ++b;
        while (e > b && is_punct_cp(tok[e - 1])) --e;
        tok = tok.substr(b, e - b);
      }
      if (!tok.empty()) tokens.push_back(utf8_encode(tok));
    }
    pos = end;
  }
  return tokens;
}

Corpus load_corpus(std::istream& in, std::string lang_tag, const TokenizeOptions& opts) {
  Corpus corpus;
  corpus.lang_tag = std::move(lang_tag);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> tokens;
    try {
      tokens = tokenize_line(line, opts);
    } catch (const DecodeError& e) {
      throw DecodeError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!tokens.empty()) corpus.sentences.push_back(std::move(tokens));
  }
  return corpus;
}

Corpus load_corpus_file(const std::string& path, std::string lang_tag,
                        const TokenizeOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  return load_corpus(in, std::move(lang_tag), opts);
}

Vocab build_vocab(const Corpus& corpus) {
  Vocab vocab;
  for (const auto& sentence : corpus.sentences)
    for (const auto& token : sentence) vocab.add(token);
  return vocab;
}

BigramTable extract_bigrams(const Corpus& corpus, const Vocab& vocab) {
  BigramTable table;
  for (const auto& sentence : corpus.sentences) {
    for (std::size_t i = 0; i + 1 < sentence.size(); ++i) {
      const auto a = vocab.id(sentence[i]);
      const auto b = vocab.id(sentence[i + 1]);
      if (!a || !b)
        throw Error("token missing from vocab: " + (!a ? sentence[i] : sentence[i + 1]));
      ++table.counts[pack_pair(*a, *b)];
      ++table.total;
    }
  }
  return table;
}

}  // namespace decipher
