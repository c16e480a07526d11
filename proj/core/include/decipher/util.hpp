#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decipher {

using WordId = std::uint32_t;

// (w1, w2) pairs are used as hash keys throughout; ids are < 2^32.
inline std::uint64_t pack_pair(WordId a, WordId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
inline WordId pair_first(std::uint64_t key) { return static_cast<WordId>(key >> 32); }
inline WordId pair_second(std::uint64_t key) { return static_cast<WordId>(key & 0xffffffffu); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public Error {        // malformed input text
 public:
  using Error::Error;
};
class SizeError : public Error {          // enumeration guard exceeded
 public:
  using Error::Error;
};
class DegenerateError : public Error {    // numerically degenerate model
 public:
  using Error::Error;
};
class DivergenceError : public Error {    // non-finite weights during training
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what), iteration(iteration) {}
  int iteration;
};
class CoverageError : public Error {      // gold lexicon does not cover eval vocab
 public:
  using Error::Error;
};
class GenerationError : public Error {    // synthetic instance generation failed
 public:
  using Error::Error;
};
class ValidationError : public Error {    // bad run configuration
 public:
  using Error::Error;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random source. All sampling primitives are pinned here (not
// delegated to std:: distributions) so that a given seed yields identical
// streams on every build of the project.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(splitmix64(seed)), gen_(base_) {}

  // Independent stream for a work unit. Derivation depends only on the
  // constructor seed and the salt, never on how much this stream consumed,
  // so parallel schedules cannot perturb child streams.
  Rng derive(std::uint64_t salt) const { return Rng(splitmix64(base_ ^ splitmix64(salt))); }

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n); n > 0
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // index into a cumulative weight vector (last element = total mass)
  std::size_t pick_cdf(const std::vector<double>& cdf);

 private:
  std::uint64_t base_;
  std::mt19937_64 gen_;
};

// UTF-8 <-> Unicode scalar values. Throws DecodeError on malformed input.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(const std::u32string& s);

// Runs fn(chunk_begin, chunk_end) over [0, count) split into fixed-size
// chunks. Chunk boundaries depend only on count, never on the thread budget,
// so callers that merge per-chunk results in chunk order get identical
// output for any `threads` value.
void parallel_chunks(std::size_t count, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace decipher
