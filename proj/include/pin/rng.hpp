#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace pin {

/// Identifies a position in the random stream family: the global seed,
/// the stream (typically a replica index) and the number of 128-bit blocks
/// already consumed.
struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

/// Counter-based generator (Philox4x32-10). Every (seed, stream) pair names
/// an independent stream; the output depends only on the seed record, so a
/// replica draws the same numbers regardless of which worker runs it.
///
/// Satisfies UniformRandomBitGenerator with 64-bit results.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(SeedRecord{seed, stream, 0}) {}
  explicit Rng(SeedRecord rec) : rec_(rec) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) refill();
    return buf_[lane_++];
  }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double exponential() { return -std::log(uniform()); }

  /// Seed record pointing at the next unused block.
  SeedRecord record() const { return rec_; }

 private:
  void refill();

  SeedRecord rec_;
  std::array<std::uint64_t, 2> buf_{};
  int lane_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline void Rng::refill() {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(rec_.counter), static_cast<std::uint32_t>(rec_.counter >> 32),
      static_cast<std::uint32_t>(rec_.stream), static_cast<std::uint32_t>(rec_.stream >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(rec_.seed),
                                      static_cast<std::uint32_t>(rec_.seed >> 32)};
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  buf_[0] = (std::uint64_t{ctr[1]} << 32) | ctr[0];
  buf_[1] = (std::uint64_t{ctr[3]} << 32) | ctr[2];
  ++rec_.counter;
  lane_ = 0;
}

}  // namespace pin
