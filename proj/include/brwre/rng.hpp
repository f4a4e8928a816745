#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace brwre {

// Counter-based generator: Philox4x32-10 (Salmon et al., SC'11).
// Every random number is a pure function of (key, counter), so draws can be
// addressed by particle label or path index regardless of thread schedule.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

// Key for one named purpose ("env", "brw", "mc", ...) under a user seed and
// a replica index. Distinct triples give unrelated streams.
std::uint64_t derive_key(std::string_view tag, std::uint64_t seed,
                         std::uint64_t index = 0);

// (0,1) open interval, 53 bits.
double bits_to_unit(std::uint64_t bits);

// Standard normal quantile, Wichura AS241 (PPND16), ~1e-16 relative.
double normal_quantile(double p);

// Stateless access to one stream.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  std::uint64_t key() const { return key_; }
  // Two independent 64-bit words for counter (a, b).
  std::array<std::uint64_t, 2> raw(std::uint64_t a, std::uint64_t b) const;
  double uniform(std::uint64_t a, std::uint64_t b = 0) const;
  // Normal via inverse CDF of uniform(a, b).
  double normal(std::uint64_t a, std::uint64_t b = 0) const;

 private:
  std::uint64_t key_;
};

// Sequential reader over one (key, row) pair: draws k = 0, 1, 2, ...
class Sequence {
 public:
  Sequence(std::uint64_t key, std::uint64_t row) : key_(key), row_(row) {}
  double uniform();
  double normal();

 private:
  std::uint64_t next_bits();
  std::uint64_t key_;
  std::uint64_t row_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int avail_ = 0;
};

}  // namespace brwre
