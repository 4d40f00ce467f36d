// Abelian stabilization of activated random walk on the box with killing at the boundary.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "arw/instructions.hpp"
#include "arw/lattice.hpp"
#include "arw/scheduler.hpp"

namespace arw {

/// Particle configuration on the interior of a box.
///
/// Each site is Empty, Sleeping (exactly one sleeping particle) or Active(k) with k >= 1.
/// A particle arriving at a Sleeping site wakes it and the site becomes Active(2).
class Configuration {
 public:
  static constexpr std::int32_t kSleeping = -1;

  Configuration() = default;
  explicit Configuration(std::size_t sites) : state_(sites, 0) {}

  std::size_t sites() const { return state_.size(); }

  bool is_empty(std::size_t i) const { return state_[i] == 0; }
  bool is_sleeping(std::size_t i) const { return state_[i] == kSleeping; }
  bool is_active(std::size_t i) const { return state_[i] >= 1; }
  /// Number of active particles (0 for Empty and Sleeping).
  std::int32_t active_count(std::size_t i) const { return state_[i] > 0 ? state_[i] : 0; }
  /// Number of particles of either kind.
  std::uint64_t particles(std::size_t i) const {
    return state_[i] == kSleeping ? 1U : static_cast<std::uint64_t>(state_[i]);
  }
  std::uint64_t total_particles() const;

  void set_empty(std::size_t i) { state_[i] = 0; }
  void set_sleeping(std::size_t i) { state_[i] = kSleeping; }
  void set_active(std::size_t i, std::int32_t count);

  std::int32_t raw(std::size_t i) const { return state_[i]; }
  std::int32_t& raw(std::size_t i) { return state_[i]; }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<std::int32_t> state_;
};

using DirectionCounts = std::array<std::uint64_t, kDirections>;

struct StabilizationResult {
  std::vector<std::uint64_t> odometer;      // M_x: movement instructions used at x
  std::vector<std::uint8_t> sleep_field;    // S_x
  std::vector<std::uint64_t> exit_measure;  // Phi_x, indexed like Box::boundary_sites()
  Configuration final_config;
  std::uint64_t total_instructions = 0;     // movements and sleeps
  std::vector<DirectionCounts> movement_counts;  // n_{x,d}(M_x), maintained incrementally

  std::uint64_t sleeping_total() const;
  std::uint64_t exit_total() const;
  std::uint64_t odometer_total() const;
};

inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000ULL;

/// Raised when a run consumes more instructions than its budget. Carries the partial state.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t instructions, std::size_t unstable_sites, std::uint64_t particles_left);

  std::uint64_t instructions() const { return instructions_; }
  std::size_t unstable_sites() const { return unstable_sites_; }
  std::uint64_t particles_left() const { return particles_left_; }

 private:
  std::uint64_t instructions_;
  std::size_t unstable_sites_;
  std::uint64_t particles_left_;
};

struct TransitionRecord {
  std::size_t site = 0;
  std::uint64_t stream_index = 0;  // k of the consumed instruction
  Instruction instruction;
  bool fell_asleep = false;
  bool woke_target = false;
  bool killed = false;
  std::int64_t target = 0;  // Box::step encoding; meaningful for moves only
};

/// Mutable stabilization state for one run. Instruction streams are keyed on `seed`, so the
/// outcome does not depend on the order in which unstable sites are processed.
class Stabilizer {
 public:
  Stabilizer(const Box& box, Configuration initial, std::uint64_t seed, SleepRate rate,
             std::uint64_t budget = kDefaultBudget);

  const Box& box() const { return *box_; }
  const Configuration& config() const { return result_.final_config; }
  const StabilizationResult& state() const { return result_; }
  std::uint64_t consumed(std::size_t i) const { return consumed_[i]; }
  bool is_stable() const;

  /// Applies the next instruction of site `i`'s stream. Throws std::logic_error when the site
  /// is not active.
  TransitionRecord topple(std::size_t i);

  /// Runs to stabilization, processing unstable sites in the order chosen by `policy`.
  void run(SchedulerPolicy policy);

  StabilizationResult take_result() &&;

 private:
  template <bool Record>
  TransitionRecord apply(std::size_t i);
  void check_budget() const;

  const Box* box_;
  std::uint64_t seed_;
  SleepRate rate_;
  std::uint64_t budget_;
  std::vector<std::uint64_t> base_;
  std::vector<std::uint64_t> consumed_;
  std::vector<std::uint8_t> pending_;
  Scheduler* scheduler_ = nullptr;
  StabilizationResult result_;
};

struct StabilizeOptions {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  SchedulerPolicy scheduler = SchedulerPolicy::fifo();
  std::uint64_t budget = kDefaultBudget;
};

StabilizationResult stabilize(const Box& box, const Configuration& initial, const StabilizeOptions& options);

}  // namespace arw
