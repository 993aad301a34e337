#ifndef LTSSL_RNG_HPP
#define LTSSL_RNG_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace ltssl {

// Deterministic random stream. The generator is pinned so that runs are
// reproducible across platforms and compilers:
//
//   core:     xoshiro256** (Blackman & Vigna), 4x uint64 state
//             next(): r = rotl(s1*5, 7)*9; t = s1<<17; s2^=s0; s3^=s1;
//                     s1^=s2; s0^=s3; s2^=t; s3 = rotl(s3, 45); return r
//   seeding:  state words are four successive SplitMix64 outputs starting
//             from (seed XOR stream * 0x9E3779B97F4A7C15)
//   uniform:  (next() >> 11) * 2^-53, in [0, 1)
//   normal:   Box-Muller, u1 = 1 - uniform() in (0, 1], u2 = uniform(),
//             returns sqrt(-2 ln u1) * cos(2 pi u2) and caches the sin pair
//   bounded:  uniform_int(n) masks next() to bit_width(n-1) bits and
//             rejects draws >= n (unbiased)
//   shuffle:  Fisher-Yates from the top using uniform_int
//
// Distinct `stream` values yield independent substreams of the same seed;
// stream assignments are listed next to their users (dataset.hpp, train.hpp).
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();                    // [0, 1)
  double normal();                     // mean 0, sigma 1
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  std::vector<std::uint32_t> permutation(std::uint32_t n);
  void shuffle(std::vector<std::uint32_t>& v);

  // Serializable state: 4 state words, spare-normal cache.
  struct State {
    std::array<std::uint64_t, 4> s;
    bool has_spare;
    double spare;
  };
  State state() const { return {s_, has_spare_, spare_}; }
  void set_state(const State& st);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ltssl

#endif
