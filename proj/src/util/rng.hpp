#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nevo {

// All stochastic code in the project draws through this interface. The
// derived samplers below are implemented on top of next_u64() with fixed
// algorithms, so a scripted source in tests can force exact outcomes and
// seeded runs replay bit-identically.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual std::uint64_t next_u64() = 0;

  // Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // +1 or -1 with equal probability.
  double sign() { return bernoulli(0.5) ? 1.0 : -1.0; }

  // Box-Muller without the cached second deviate, so the stream position
  // stays a pure function of the number of calls.
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() override { return gen_(); }

  // Independent child stream keyed off this stream's position.
  Rng spawn() { return Rng(next_u64()); }

  std::string save_state() const;
  void load_state(const std::string& text);

 private:
  std::mt19937_64 gen_;
};

// Replays a fixed sequence of words, then falls back to a seeded stream.
// Test-facing; lives here so operator code can stay agnostic.
class ScriptedSource final : public RandomSource {
 public:
  explicit ScriptedSource(std::vector<std::uint64_t> words)
      : words_(std::move(words)), fallback_(0xBADC0FFEE) {}

  std::uint64_t next_u64() override {
    if (pos_ < words_.size()) return words_[pos_++];
    return fallback_.next_u64();
  }

  // Word that makes uniform() return exactly u (u in [0,1)).
  static std::uint64_t word_for_uniform(double u) {
    return static_cast<std::uint64_t>(u * 0x1.0p53) << 11;
  }

  // Word that makes uniform_int(lo, hi) return v.
  static std::uint64_t word_for_int(std::int64_t lo, std::int64_t hi, std::int64_t v) {
    return static_cast<std::uint64_t>(v - lo);
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t pos_ = 0;
  Rng fallback_;
};

// FNV-1a, used for content hashes and derived seeds.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& text, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace nevo
