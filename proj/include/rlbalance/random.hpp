#pragma once

#include <cstdint>
#include <random>

namespace rlbalance {

/// Independent random streams drawn from one master seed.
///
/// Every stream is an std::mt19937_64 engine whose seed is
/// splitmix64(master_seed ^ splitmix64(stream_id)). The engine's output
/// sequence is fixed by the C++ standard, and all variates below are built
/// from raw 64-bit draws by hand (no std:: distributions, whose algorithms
/// differ between standard libraries), so traces reproduce bit-for-bit
/// across platforms with an IEEE-754 libm.
enum class Stream : std::uint64_t {
  Arrival = 1,
  Size = 2,
  BurstState = 3,
  Exploration = 4,
  // Training traces draw from a disjoint seed family so evaluation never
  // replays the training workload.
  TrainingWorkload = 5,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, Stream stream)
      : engine_(derive_seed(master_seed, static_cast<std::uint64_t>(stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform integer in [0, n). Lemire-free rejection sampling; n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Exponential with the given mean (> 0). Always strictly positive.
  double exponential(double mean);
  /// Standard normal via Box-Muller (one value per two uniforms, no caching).
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace rlbalance
