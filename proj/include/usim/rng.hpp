#pragma once

#include <cstdint>
#include <string_view>

namespace usim::rng {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Counter-based splitmix64 stream. Cheap to fork, trivially reproducible.
class Stream {
public:
  explicit Stream(std::uint64_t state = 0) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform in [0, n); Lemire multiply-shift
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  std::uint64_t state() const { return state_; }

private:
  std::uint64_t state_;
};

// Stream state is a pure function of (master_seed, agent_id, purpose): the
// agent/purpose pair is hashed, xor-folded into the seed and double-mixed.
inline Stream derive_stream(std::uint64_t master_seed, std::uint64_t agent_id,
                            std::string_view purpose) {
  std::uint64_t h = mix64(agent_id * 0x9E3779B97F4A7C15ull ^ fnv1a(purpose));
  return Stream(mix64(master_seed ^ h));
}

// hash-derived uniform in [0,1), independent of any stream position
inline double hash01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(mix64(mix64(seed ^ 0x632BE59BD9B4E019ull) ^ index) >> 11) * 0x1.0p-53;
}

}  // namespace usim::rng
