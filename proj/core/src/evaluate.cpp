#include "decipher/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace decipher {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Lexicon sorted_lexicon(std::vector<std::pair<std::string, std::string>> entries) {
  std::sort(entries.begin(), entries.end());
  return Lexicon{std::move(entries)};
}

}  // namespace

Lexicon extract_lexicon(const TranslationTable& table, const Vocab& source, const Vocab& target) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(source.size());
  for (WordId f = 0; f < source.size(); ++f) {
    WordId best = 0;
    double best_p = -1.0;
    for (WordId e = 0; e < target.size(); ++e) {
      if (table.at(e, f) > best_p) {  // strict: ties keep the lowest id
        best_p = table.at(e, f);
        best = e;
      }
    }
    entries.push_back({source.word(f), target.word(best)});
  }
  return sorted_lexicon(std::move(entries));
}

Lexicon extract_lexicon(const WeightVector& w, const FeatureSpace& fs) {
  const Vocab& source = fs.source_vocab();
  const Vocab& target = fs.target_vocab();
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(source.size());
  for (WordId f = 0; f < source.size(); ++f) {
    WordId best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (WordId e = 0; e < target.size(); ++e) {
      const double s = unigram_score(w, fs, f, e);
      if (s > best_score) {
        best_score = s;
        best = e;
      }
    }
    entries.push_back({source.word(f), target.word(best)});
  }
  return sorted_lexicon(std::move(entries));
}

double accuracy(const Lexicon& lex, const GoldLexicon& gold,
                const std::unordered_set<std::string>& ignore) {
  if (gold.map.empty()) throw std::invalid_argument("accuracy: empty gold lexicon");
  std::vector<std::string> missing;
  std::size_t correct = 0;
  for (const auto& [f, e] : lex.entries) {
    if (ignore.count(f)) continue;
    auto it = gold.map.find(f);
    if (it == gold.map.end()) {
      missing.push_back(f);
      continue;
    }
    if (it->second == e) ++correct;
  }
  if (!missing.empty()) {
    std::string msg = "gold lexicon does not cover evaluated words:";
    for (const auto& w : missing) msg += " " + w;
    throw CoverageError(msg);
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.map.size());
}

LogEmission em_log_emission(const TranslationTable& table) {
  return [&table](WordId e, WordId f) {
    const double p = table.at(e, f);
    return p > 0.0 ? std::log(p) : kNegInf;
  };
}

LogEmission ll_log_emission(const WeightVector& w, const FeatureSpace& fs) {
  return [&w, &fs](WordId e, WordId f) { return unigram_score(w, fs, f, e); };
}

std::vector<std::string> viterbi_decode(const std::vector<std::string>& sentence,
                                        const LogEmission& log_emission, const Vocab& source,
                                        const BigramLM& lm) {
  if (sentence.empty()) return {};
  const std::uint32_t ve = lm.vocab_size();
  std::vector<WordId> fids;
  fids.reserve(sentence.size());
  for (const auto& token : sentence) {
    const auto id = source.id(token);
    if (!id) throw Error("viterbi: source token not in vocabulary: " + token);
    fids.push_back(*id);
  }

  const std::size_t len = fids.size();
  std::vector<double> delta(ve), next(ve);
  std::vector<std::vector<WordId>> back(len, std::vector<WordId>(ve, 0));

  for (WordId e = 0; e < ve; ++e) {
    const double start = lm.marginal_first(e);
    delta[e] = (start > 0.0 ? std::log(start) : kNegInf) + log_emission(e, fids[0]);
  }
  for (std::size_t t = 1; t < len; ++t) {
    for (WordId e = 0; e < ve; ++e) {
      double best = kNegInf;
      WordId argbest = 0;
      for (WordId prev = 0; prev < ve; ++prev) {
        if (delta[prev] == kNegInf) continue;
        const double cond = lm.cond_second(prev, e);
        if (cond <= 0.0) continue;
        const double cand = delta[prev] + std::log(cond);
        if (cand > best) {
          best = cand;
          argbest = prev;
        }
      }
      next[e] = best + log_emission(e, fids[t]);
      back[t][e] = argbest;
    }
    std::swap(delta, next);
  }

  WordId best_end = 0;
  double best_score = kNegInf;
  for (WordId e = 0; e < ve; ++e)
    if (delta[e] > best_score) {
      best_score = delta[e];
      best_end = e;
    }
  if (best_score == kNegInf) throw DegenerateError("viterbi: no admissible target path");

  std::vector<WordId> path(len);
  path[len - 1] = best_end;
  for (std::size_t t = len - 1; t > 0; --t) path[t - 1] = back[t][path[t]];

  std::vector<std::string> out;
  out.reserve(len);
  for (WordId e : path) out.push_back(lm.vocab().word(e));
  return out;
}

double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty corpus");
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("bleu: hypothesis/reference count mismatch");

  std::size_t shortest_ref = std::numeric_limits<std::size_t>::max();
  for (const auto& ref : references) shortest_ref = std::min(shortest_ref, ref.size());
  const std::size_t max_order = std::min<std::size_t>(4, shortest_ref);
  if (max_order == 0) throw std::invalid_argument("bleu: empty reference sentence");

  std::vector<double> matched(max_order, 0.0), total(max_order, 0.0);
  double hyp_len = 0.0, ref_len = 0.0;

  auto ngrams = [](const std::vector<std::string>& tokens, std::size_t order) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < order) return counts;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string key;
      for (std::size_t k = 0; k < order; ++k) {
        key += tokens[i + k];
        key += '\x1f';
      }
      ++counts[key];
    }
    return counts;
  };

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    hyp_len += static_cast<double>(hypotheses[s].size());
    ref_len += static_cast<double>(references[s].size());
    for (std::size_t order = 1; order <= max_order; ++order) {
      const auto hyp_counts = ngrams(hypotheses[s], order);
      const auto ref_counts = ngrams(references[s], order);
      for (const auto& [key, count] : hyp_counts) {
        total[order - 1] += static_cast<double>(count);
        auto it = ref_counts.find(key);
        if (it != ref_counts.end())
          matched[order - 1] += static_cast<double>(std::min(count, it->second));
      }
    }
  }

  double log_precision = 0.0;
  for (std::size_t order = 0; order < max_order; ++order) {
    if (matched[order] == 0.0 || total[order] == 0.0) return 0.0;
    log_precision += std::log(matched[order] / total[order]);
  }
  log_precision /= static_cast<double>(max_order);
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_precision);
}

void save_lexicon_tsv(std::ostream& out, const Lexicon& lex) {
  for (const auto& [f, e] : lex.entries) out << f << '\t' << e << '\n';
}

Lexicon load_lexicon_tsv(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DecodeError("lexicon tsv line " + std::to_string(line_no) + ": expected f<TAB>e");
    entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return sorted_lexicon(std::move(entries));
}

void save_gold_tsv(std::ostream& out, const GoldLexicon& gold) {
  std::vector<std::pair<std::string, std::string>> rows(gold.map.begin(), gold.map.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [f, e] : rows) out << f << '\t' << e << '\n';
}

GoldLexicon load_gold_tsv(std::istream& in) {
  GoldLexicon gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DecodeError("gold tsv line " + std::to_string(line_no) + ": expected f<TAB>e");
    gold.map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return gold;
}

}  // namespace decipher
