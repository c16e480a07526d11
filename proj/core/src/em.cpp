#include "decipher/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace decipher {
namespace {

constexpr std::uint32_t kDenseVocabGuard = 4096;

// Dense copy of the joint LM; EM revisits every (e1, e2) cell per bigram, so
// hash lookups in the inner loop would dominate the iteration.
std::vector<double> dense_lm(const BigramLM& lm) {
  const std::uint32_t v = lm.vocab_size();
  std::vector<double> joint(static_cast<std::size_t>(v) * v);
  for (WordId e1 = 0; e1 < v; ++e1)
    for (WordId e2 = 0; e2 < v; ++e2)
      joint[static_cast<std::size_t>(e1) * v + e2] = lm.prob(e1, e2);
  return joint;
}

struct BigramPosterior {
  std::vector<double> marg1, marg2;  // posterior marginals for e1 and e2
  double loglik_term;
};

// Posterior marginals for one observed bigram. Emission columns are rescaled
// by their max so the V^2 pass cannot underflow; the rescaling cancels in the
// normalized marginals and is added back for the likelihood.
BigramPosterior bigram_posterior(const std::vector<double>& joint, std::uint32_t ve,
                                 const std::vector<double>& col1, const std::vector<double>& col2) {
  const double m1 = *std::max_element(col1.begin(), col1.end());
  const double m2 = *std::max_element(col2.begin(), col2.end());
  if (m1 <= 0.0 || m2 <= 0.0)
    throw DegenerateError("em: zero emission mass for an observed bigram");

  BigramPosterior out;
  out.marg1.assign(ve, 0.0);
  out.marg2.assign(ve, 0.0);
  double total = 0.0;
  for (WordId e1 = 0; e1 < ve; ++e1) {
    const double t1 = col1[e1] / m1;
    if (t1 == 0.0) continue;
    const double* row = joint.data() + static_cast<std::size_t>(e1) * ve;
    double row_acc = 0.0;
    for (WordId e2 = 0; e2 < ve; ++e2) {
      const double u = row[e2] * (col2[e2] / m2);
      row_acc += u;
      out.marg2[e2] += u * t1;
    }
    out.marg1[e1] = t1 * row_acc;
    total += out.marg1[e1];
  }
  if (total <= 0.0)
    throw DegenerateError("em: zero posterior mass for an observed bigram");
  for (WordId e = 0; e < ve; ++e) {
    out.marg1[e] /= total;
    out.marg2[e] /= total;
  }
  out.loglik_term = std::log(total) + std::log(m1) + std::log(m2);
  return out;
}

}  // namespace

TranslationTable em_init(const Vocab& source, const Vocab& target) {
  if (source.size() == 0 || target.size() == 0)
    throw std::invalid_argument("em_init: empty vocabulary");
  TranslationTable t;
  t.n_target = target.size();
  t.n_source = source.size();
  t.probs.assign(static_cast<std::size_t>(t.n_target) * t.n_source,
                 1.0 / static_cast<double>(t.n_source));
  return t;
}

EmStep em_iterate(const TranslationTable& table, const BigramTable& src, const BigramLM& lm,
                  int threads) {
  const std::uint32_t ve = table.n_target, vf = table.n_source;
  if (ve != lm.vocab_size()) throw std::invalid_argument("em: table/LM vocab mismatch");
  if (ve > kDenseVocabGuard || vf > kDenseVocabGuard)
    throw SizeError("em: vocabulary too large for the dense tables");

  const std::vector<double> joint = dense_lm(lm);
  const auto entries = src.sorted();

  std::vector<double> counts(static_cast<std::size_t>(ve) * vf, 0.0);
  double loglik = 0.0;

  // per-chunk partials merged in chunk order keep the reduction associative
  // and deterministic for any thread count
  const std::size_t chunk_size = 64;
  const std::size_t n_chunks = (entries.size() + chunk_size - 1) / chunk_size;
  struct ChunkOut {
    std::map<WordId, std::vector<double>> columns;  // f -> expected counts over e
    double loglik = 0.0;
  };
  std::vector<ChunkOut> partials(n_chunks);

  parallel_chunks(entries.size(), chunk_size, threads, [&](std::size_t begin, std::size_t end) {
    ChunkOut& out = partials[begin / chunk_size];
    std::vector<double> col1(ve), col2(ve);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& entry = entries[i];
      for (WordId e = 0; e < ve; ++e) {
        col1[e] = table.at(e, entry.w1);
        col2[e] = table.at(e, entry.w2);
      }
      const BigramPosterior post = bigram_posterior(joint, ve, col1, col2);
      const double c = static_cast<double>(entry.count);
      auto& column1 = out.columns.try_emplace(entry.w1, ve, 0.0).first->second;
      for (WordId e = 0; e < ve; ++e) column1[e] += c * post.marg1[e];
      auto& column2 = out.columns.try_emplace(entry.w2, ve, 0.0).first->second;
      for (WordId e = 0; e < ve; ++e) column2[e] += c * post.marg2[e];
      out.loglik += c * post.loglik_term;
    }
  });

  for (const ChunkOut& part : partials) {
    loglik += part.loglik;
    for (const auto& [f, column] : part.columns)
      for (WordId e = 0; e < ve; ++e) counts[static_cast<std::size_t>(e) * vf + f] += column[e];
  }

  // M-step: renormalize per target word; rows with no evidence keep their
  // previous distribution (they stay row-stochastic and cannot hurt the bound)
  EmStep step;
  step.loglik = loglik;
  step.table.n_target = ve;
  step.table.n_source = vf;
  step.table.probs.resize(counts.size());
  for (WordId e = 0; e < ve; ++e) {
    double row_sum = 0.0;
    for (WordId f = 0; f < vf; ++f) row_sum += counts[static_cast<std::size_t>(e) * vf + f];
    if (row_sum > 0.0) {
      for (WordId f = 0; f < vf; ++f)
        step.table.at(e, f) = counts[static_cast<std::size_t>(e) * vf + f] / row_sum;
    } else {
      for (WordId f = 0; f < vf; ++f) step.table.at(e, f) = table.at(e, f);
    }
  }
  return step;
}

EmRun run_em(const TranslationTable& init, const BigramTable& src, const BigramLM& lm,
             int iterations, int threads) {
  if (iterations < 1) throw std::invalid_argument("run_em: iterations must be >= 1");
  EmRun run;
  run.table = init;
  run.loglik_trace.reserve(static_cast<std::size_t>(iterations));
  run.seconds.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    EmStep step = em_iterate(run.table, src, lm, threads);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    run.table = std::move(step.table);
    run.loglik_trace.push_back(step.loglik);
    run.seconds.push_back(dt.count());
  }
  return run;
}

void save_ttable_tsv(std::ostream& out, const TranslationTable& table, const Vocab& source,
                     const Vocab& target) {
  const auto old_precision = out.precision(17);
  for (WordId e = 0; e < table.n_target; ++e)
    for (WordId f = 0; f < table.n_source; ++f)
      if (table.at(e, f) >= 1e-6)
        out << target.word(e) << '\t' << source.word(f) << '\t' << table.at(e, f) << '\n';
  out.precision(old_precision);
}

TranslationTable load_ttable_tsv(std::istream& in, const Vocab& source, const Vocab& target) {
  TranslationTable t;
  t.n_target = target.size();
  t.n_source = source.size();
  t.probs.assign(static_cast<std::size_t>(t.n_target) * t.n_source, 0.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string e, f;
    double p = 0.0;
    if (!std::getline(ss, e, '\t') || !std::getline(ss, f, '\t') || !(ss >> p))
      throw DecodeError("ttable tsv line " + std::to_string(line_no) +
                        ": expected e<TAB>f<TAB>prob");
    const auto eid = target.id(e), fid = source.id(f);
    if (!eid || !fid) continue;
    t.at(*eid, *fid) = p;
  }
  return t;
}

}  // namespace decipher
