#pragma once

#include <cstdint>
#include <vector>

namespace bsdlab {

// Deterministic generator with cheaply derivable substreams. Trial-level
// substreams keep serial and parallel harness runs bit-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix64 warmup so nearby seeds decorrelate
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next_u64() % span);
  }

  bool coin(double p_true = 0.5) { return uniform() < p_true; }

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed * 0x100000001b3ULL + stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
  }

 private:
  std::uint64_t state_;
};

}  // namespace bsdlab
