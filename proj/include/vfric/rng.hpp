#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace vfric {

/// Independent noise sources of one path. The y- and theta-noise of the
/// cylinder model must never share a stream.
enum class Component : std::uint64_t { y_noise = 1, theta_noise = 2, aux = 3 };

/// xoshiro256++ generator; satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Keyed random stream: the state is a pure function of
/// (experiment seed, path index, component), so a path draws the same
/// numbers whatever worker runs it and in whatever order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t path, Component component);

  double normal();
  /// Uniform on [0, 1).
  double uniform();

  Xoshiro256pp& engine() { return engine_; }

 private:
  Xoshiro256pp engine_;
};

/// Mixes (seed, path, component) into one 64-bit key.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path, Component component);

}  // namespace vfric
