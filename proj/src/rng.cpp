#include "vfric/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace vfric {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path, Component component) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state = key ^ path;
  key = splitmix64(state);
  state = key ^ static_cast<std::uint64_t>(component);
  return splitmix64(state);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t path, Component component)
    : engine_(stream_key(seed, path, component)) {}

double RngStream::normal() {
  // boost's normal_distribution uses the ziggurat method and keeps no
  // cached state, so a fresh object per draw is free.
  return boost::random::normal_distribution<double>()(engine_);
}

double RngStream::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace vfric
