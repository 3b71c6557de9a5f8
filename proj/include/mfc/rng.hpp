#pragma once

#include <cstdint>
#include <random>

namespace mfc {

/// Identifies one independent random stream: (master seed, cascade level,
/// replicate index). Every latent field in a run is drawn from its own stream,
/// so results do not depend on evaluation order or worker count.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t level = 0;
  std::uint64_t replicate = 0;

  StreamKey with_level(std::uint64_t i) const { return {master, i, replicate}; }
  StreamKey with_replicate(std::uint64_t r) const { return {master, level, r}; }

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit engine seed for a stream: mix(mix(mix(master) ^ level) ^ replicate),
/// with distinct odd offsets so that permuted keys do not collide.
constexpr std::uint64_t stream_seed(const StreamKey& key) {
  std::uint64_t h = mix64(key.master);
  h = mix64(h ^ (key.level * 0xd1b54a32d192ed03ULL + 1));
  h = mix64(h ^ (key.replicate * 0x8cb92ba72f3d8dd7ULL + 3));
  return h;
}

/// Random source bound to one stream. Uses std::mt19937_64 (bit-exact across
/// standard libraries) with portable uniform and normal transforms, since the
/// std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(const StreamKey& key) : engine_(stream_seed(key)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller; caches the second variate.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mfc
