// Worklists deciding which unstable site is processed next.
#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "arw/lattice.hpp"

namespace arw {

struct SchedulerPolicy {
  enum class Kind : std::uint8_t { Fifo, Lifo, UniformRandom, CycleSweep };

  Kind kind = Kind::Fifo;
  std::uint64_t seed = 0;  // only used by UniformRandom

  static constexpr SchedulerPolicy fifo() { return {Kind::Fifo, 0}; }
  static constexpr SchedulerPolicy lifo() { return {Kind::Lifo, 0}; }
  static constexpr SchedulerPolicy uniform_random(std::uint64_t seed) { return {Kind::UniformRandom, seed}; }
  static constexpr SchedulerPolicy cycle_sweep() { return {Kind::CycleSweep, 0}; }

  friend constexpr bool operator==(const SchedulerPolicy&, const SchedulerPolicy&) = default;
};

/// CLI spelling: fifo, lifo, random, cycle.
std::string_view policy_name(SchedulerPolicy policy);
std::optional<SchedulerPolicy> parse_policy(std::string_view name, std::uint64_t seed = 0);

/// The four policies, random one seeded with `seed`.
std::vector<SchedulerPolicy> all_policies(std::uint64_t seed);

/// Set of pending interior site indices with a policy-defined extraction order.
///
/// The engine guarantees a site is never pushed twice while pending, so the worklist does not
/// deduplicate. Every policy eventually pops every pushed site.
class Scheduler {
 public:
  Scheduler(SchedulerPolicy policy, const Box& box);

  void push(std::size_t site);
  /// Precondition: !empty().
  std::size_t pop();
  bool empty() const;
  std::size_t size() const;

  SchedulerPolicy policy() const { return policy_; }

 private:
  SchedulerPolicy policy_;
  const Box* box_;
  std::deque<std::size_t> queue_;
  std::vector<std::size_t> stack_;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ranks_;
  std::mt19937_64 rng_;
};

}  // namespace arw
