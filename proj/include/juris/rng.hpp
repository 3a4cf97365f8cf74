#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace juris {

// Deterministic xoshiro256** generator. We roll our own instead of using
// <random> engines+distributions because libstdc++/libc++ disagree on
// distribution output, and run artifacts must be byte-identical everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform();

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t uniform_int(uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Sample k distinct indices from [0, n), in selection order.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

 private:
  uint64_t state_[4];
};

// Named stream derivation: every stochastic component draws from
// rng_stream(seed, "its-name"), so adding a consumer never perturbs the
// sequences seen by the others.
Rng rng_stream(uint64_t seed, std::string_view name);

}  // namespace juris
