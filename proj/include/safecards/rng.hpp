#pragma once

#include <cstdint>
#include <string>

namespace safecards {

// SplitMix64 finalizer. Used to expand user seeds and to derive per-game seeds.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// PCG32 (XSH-RR output, 64-bit LCG state, selectable stream). The seeding
// procedure is fixed so shuffles are identical on every platform:
//   state0 = splitmix64(seed), stream = splitmix64(seed ^ stream_tag) | 1
// followed by the reference pcg32_srandom sequence.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0) {}
  explicit Pcg32(uint64_t seed, uint64_t stream_tag = 0);

  static Pcg32 from_raw(uint64_t state, uint64_t inc) {
    Pcg32 r;
    r.state_ = state;
    r.inc_ = inc;
    return r;
  }

  uint32_t next_u32();

  // Unbiased integer in [0, bound). bound must be > 0.
  uint32_t bounded(uint32_t bound);

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_unit();

  uint64_t state() const { return state_; }
  uint64_t inc() const { return inc_; }

  // 32 lowercase hex digits: state then increment.
  std::string to_hex() const;
  static Pcg32 from_hex(const std::string& hex);

  friend bool operator==(const Pcg32&, const Pcg32&) = default;

 private:
  uint64_t state_ = 0;
  uint64_t inc_ = 1;
};

// Per-game seed for game `index` under `master_seed`. Adding games never
// changes the seeds of earlier games.
constexpr uint64_t derive_game_seed(uint64_t master_seed, uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

}  // namespace safecards
