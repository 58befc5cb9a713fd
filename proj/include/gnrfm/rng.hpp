#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gnrfm {

/// Portable random stream: std::mt19937_64 (output fully specified by the
/// standard) with hand-written transforms, so a seed yields the same numbers
/// on every platform and standard library.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+box-muller";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box-Muller transform (pairs cached).
  double normal();
  /// Uniform integer in [0, bound), rejection sampled; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 mixing of (seed, stream) into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gnrfm
