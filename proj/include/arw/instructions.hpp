// Site-wise instruction stacks.
//
// Each site carries one raw stream of instructions indexed k = 1, 2, ... . An instruction is a
// sleep attempt with probability lambda / (1 + lambda) and otherwise a move to one of the four
// neighbors chosen uniformly. The movement stack (xi_k) and the sleep gaps (g_k) are views of
// this single stream: g_k is the number of sleep instructions strictly between movement k and
// movement k + 1, and g_0 counts those before the first movement.
#pragma once

#include <cstdint>

#include "arw/counter_rng.hpp"
#include "arw/lattice.hpp"

namespace arw {

/// Sleep rate with its precomputed 53-bit acceptance threshold.
class SleepRate {
 public:
  explicit SleepRate(double lambda);

  double lambda() const { return lambda_; }
  double sleep_probability() const { return lambda_ / (1.0 + lambda_); }
  std::uint64_t threshold() const { return threshold_; }

 private:
  double lambda_;
  std::uint64_t threshold_;
};

struct Instruction {
  enum class Kind : std::uint8_t { Sleep, Move };

  Kind kind = Kind::Sleep;
  int direction = -1;  // 0..3 for moves, -1 for sleep

  static constexpr Instruction sleep() { return {Kind::Sleep, -1}; }
  static constexpr Instruction move(int d) { return {Kind::Move, d}; }
  bool is_sleep() const { return kind == Kind::Sleep; }

  friend constexpr bool operator==(const Instruction&, const Instruction&) = default;
};

constexpr std::uint64_t site_key(Site s) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 32) |
         static_cast<std::uint32_t>(s.y);
}

/// Per-site stream base; instruction k at that site is decoded from counter_draw(base, k).
constexpr std::uint64_t stream_base(std::uint64_t seed, Site s) {
  return hash_combine(seed, site_key(s));
}

constexpr Instruction decode_instruction(std::uint64_t bits, std::uint64_t threshold) {
  if ((bits >> 11) < threshold) return Instruction::sleep();
  return Instruction::move(static_cast<int>(bits & 3U));
}

/// Read-only view of one site's instruction stream. Every query is a pure function of
/// (seed, site, lambda, indices); the stream keeps no consumption state.
class InstructionStream {
 public:
  InstructionStream(std::uint64_t seed, Site site, SleepRate rate)
      : seed_(seed), site_(site), rate_(rate), base_(stream_base(seed, site)) {}
  InstructionStream(std::uint64_t seed, Site site, double lambda)
      : InstructionStream(seed, site, SleepRate(lambda)) {}

  std::uint64_t seed() const { return seed_; }
  Site site() const { return site_; }
  const SleepRate& rate() const { return rate_; }

  /// Instruction k >= 1.
  Instruction instruction_at(std::uint64_t k) const {
    return decode_instruction(counter_draw(base_, k), rate_.threshold());
  }

  /// Stream position of the m-th movement (0 when m == 0).
  std::uint64_t movement_position(std::uint64_t m) const;

  /// n_{x,y}(m): how many of the first m movements go in direction d.
  std::uint64_t movement_count(std::uint64_t m, int d) const;

  /// 1 iff the instruction right after the m-th movement is a sleep, i.e. gap(m) > 0.
  int chi(std::uint64_t m) const;

  /// Number of sleep instructions between movement k and movement k + 1.
  std::uint64_t gap(std::uint64_t k) const;

 private:
  std::uint64_t seed_;
  Site site_;
  SleepRate rate_;
  std::uint64_t base_;
};

}  // namespace arw
