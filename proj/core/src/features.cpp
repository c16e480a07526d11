#include "decipher/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace decipher {
namespace {

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

double normalized_edit_distance(std::string_view f, std::string_view e) {
  if (f.empty() || e.empty())
    throw std::invalid_argument("normalized_edit_distance: empty token");
  const std::u32string a = utf8_decode(f), b = utf8_decode(e);
  const std::size_t longer = std::max(a.size(), b.size());
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longer);
}

FeatureSpace::FeatureSpace(Vocab source, Vocab target, bool ortho_enabled, double threshold)
    : source_(std::move(source)),
      target_(std::move(target)),
      ortho_enabled_(ortho_enabled),
      threshold_(threshold) {
  if (!ortho_enabled_) return;
  const std::size_t bits =
      static_cast<std::size_t>(source_.size()) * target_.size();
  sim_bits_.assign((bits + 63) / 64, 0);

  // decode every word once; the pair scan below is the O(|V_F| * |V_E|) part
  std::vector<std::u32string> src32(source_.size()), tgt32(target_.size());
  for (WordId f = 0; f < source_.size(); ++f) src32[f] = utf8_decode(source_.word(f));
  for (WordId e = 0; e < target_.size(); ++e) tgt32[e] = utf8_decode(target_.word(e));

  for (WordId f = 0; f < source_.size(); ++f) {
    const auto& a = src32[f];
    for (WordId e = 0; e < target_.size(); ++e) {
      const auto& b = tgt32[e];
      if (a.empty() || b.empty()) continue;
      const std::size_t longer = std::max(a.size(), b.size());
      const std::size_t diff =
          a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
      // the length gap alone already forces distance >= diff / longer
      if (static_cast<double>(diff) / static_cast<double>(longer) >= threshold_) continue;
      const double d =
          static_cast<double>(levenshtein(a, b)) / static_cast<double>(longer);
      if (d < threshold_) {
        const std::size_t bit = static_cast<std::size_t>(f) * target_.size() + e;
        sim_bits_[bit >> 6] |= (1ull << (bit & 63));
      }
    }
  }
}

FeatureVector phi(WordId f, WordId e, const FeatureSpace& fs) {
  return {pack_pair(f, e), fs.ortho(f, e)};
}

BigramFeatures bigram_phi(WordId f1, WordId f2, WordId e1, WordId e2, const FeatureSpace& fs) {
  return {pack_pair(f1, e1), pack_pair(f2, e2),
          (fs.ortho(f1, e1) ? 1 : 0) + (fs.ortho(f2, e2) ? 1 : 0)};
}

double FeatureVec::l2_norm() const {
  double acc = ortho * ortho;
  for (const auto& [_, value] : translation) acc += value * value;
  return std::sqrt(acc);
}

double linf_diff(const FeatureVec& a, const FeatureVec& b) {
  double worst = std::abs(a.ortho - b.ortho);
  for (const auto& [key, value] : a.translation)
    worst = std::max(worst, std::abs(value - b.get(key)));
  for (const auto& [key, value] : b.translation)
    worst = std::max(worst, std::abs(value - a.get(key)));
  return worst;
}

WeightVector init_weights(const FeatureSpace& fs, const InitConfig& cfg) {
  WeightVector w;
  if (!cfg.ortho_enabled || !fs.ortho_enabled()) return w;  // nothing stored
  w.ortho_weight = cfg.ortho_weight;
  for (WordId f = 0; f < fs.source_vocab().size(); ++f)
    for (WordId e = 0; e < fs.target_vocab().size(); ++e)
      if (fs.ortho(f, e)) w.translation.emplace(pack_pair(f, e), cfg.seed_weight);
  return w;
}

void save_weights_tsv(std::ostream& out, const WeightVector& w, const FeatureSpace& fs) {
  const auto old_precision = out.precision(17);
  if (fs.ortho_enabled()) out << "# ortho_weight\t" << w.ortho_weight << "\n";
  std::vector<std::pair<std::pair<std::string, std::string>, double>> rows;
  rows.reserve(w.translation.size());
  for (const auto& [key, weight] : w.translation)
    rows.push_back({{fs.source_vocab().word(pair_first(key)),
                     fs.target_vocab().word(pair_second(key))},
                    weight});
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [words, weight] : rows)
    out << words.first << '\t' << words.second << '\t' << weight << '\n';
  out.precision(old_precision);
}

WeightVector load_weights_tsv(std::istream& in, const Vocab& source, const Vocab& target) {
  WeightVector w;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ortho_weight", 0) == 0) {
      std::istringstream ss(line.substr(14));
      ss >> w.ortho_weight;
      continue;
    }
    std::istringstream ss(line);
    std::string f, e;
    double weight = 0.0;
    if (!std::getline(ss, f, '\t') || !std::getline(ss, e, '\t') || !(ss >> weight))
      throw DecodeError("weights tsv line " + std::to_string(line_no) +
                        ": expected f<TAB>e<TAB>weight");
    const auto fid = source.id(f), eid = target.id(e);
    // pairs outside the current vocabularies cannot influence scoring; skip them
    if (!fid || !eid) continue;
    w.translation[pack_pair(*fid, *eid)] = weight;
  }
  return w;
}

}  // namespace decipher
