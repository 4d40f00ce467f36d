#include "arw/engine.hpp"

#include <numeric>
#include <string>

namespace arw {

std::uint64_t Configuration::total_particles() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < state_.size(); ++i) total += particles(i);
  return total;
}

void Configuration::set_active(std::size_t i, std::int32_t count) {
  if (count < 0) throw std::invalid_argument("negative particle count");
  state_[i] = count;
}

std::uint64_t StabilizationResult::sleeping_total() const {
  return std::accumulate(sleep_field.begin(), sleep_field.end(), std::uint64_t{0});
}

std::uint64_t StabilizationResult::exit_total() const {
  return std::accumulate(exit_measure.begin(), exit_measure.end(), std::uint64_t{0});
}

std::uint64_t StabilizationResult::odometer_total() const {
  return std::accumulate(odometer.begin(), odometer.end(), std::uint64_t{0});
}

BudgetExceeded::BudgetExceeded(std::uint64_t instructions, std::size_t unstable_sites,
                               std::uint64_t particles_left)
    : std::runtime_error("instruction budget exceeded after " + std::to_string(instructions) +
                         " instructions (" + std::to_string(unstable_sites) + " unstable sites, " +
                         std::to_string(particles_left) + " particles left in the box)"),
      instructions_(instructions),
      unstable_sites_(unstable_sites),
      particles_left_(particles_left) {}

Stabilizer::Stabilizer(const Box& box, Configuration initial, std::uint64_t seed, SleepRate rate,
                       std::uint64_t budget)
    : box_(&box), seed_(seed), rate_(rate), budget_(budget) {
  const std::size_t n = box.size();
  if (initial.sites() != n) throw std::invalid_argument("configuration does not match the box");
  base_.resize(n);
  for (std::size_t i = 0; i < n; ++i) base_[i] = stream_base(seed, box.site(i));
  consumed_.assign(n, 0);
  pending_.assign(n, 0);
  result_.odometer.assign(n, 0);
  result_.sleep_field.assign(n, 0);
  result_.exit_measure.assign(box.boundary_size(), 0);
  result_.movement_counts.assign(n, DirectionCounts{});
  result_.final_config = std::move(initial);
}

bool Stabilizer::is_stable() const {
  const Configuration& c = result_.final_config;
  for (std::size_t i = 0; i < c.sites(); ++i) {
    if (c.is_active(i)) return false;
  }
  return true;
}

void Stabilizer::check_budget() const {
  if (result_.total_instructions < budget_) return;
  const Configuration& c = result_.final_config;
  std::size_t unstable = 0;
  for (std::size_t i = 0; i < c.sites(); ++i) unstable += c.is_active(i) ? 1 : 0;
  throw BudgetExceeded(result_.total_instructions, unstable, c.total_particles());
}

template <bool Record>
TransitionRecord Stabilizer::apply(std::size_t i) {
  check_budget();
  TransitionRecord rec;
  std::int32_t& here = result_.final_config.raw(i);
  const std::uint64_t k = ++consumed_[i];
  ++result_.total_instructions;
  const Instruction ins = decode_instruction(counter_draw(base_[i], k), rate_.threshold());
  if constexpr (Record) {
    rec.site = i;
    rec.stream_index = k;
    rec.instruction = ins;
  }

  if (ins.is_sleep()) {
    // Sleep only takes effect on a lone particle; otherwise the instruction is spent idle.
    if (here == 1) {
      here = Configuration::kSleeping;
      if constexpr (Record) rec.fell_asleep = true;
    }
    return rec;
  }

  const int d = ins.direction;
  --here;
  ++result_.odometer[i];
  ++result_.movement_counts[i][d];
  const std::int64_t t = box_->step(i, d);
  if constexpr (Record) rec.target = t;
  if (t < 0) {
    ++result_.exit_measure[static_cast<std::size_t>(-t - 1)];
    if constexpr (Record) rec.killed = true;
    return rec;
  }
  const auto ti = static_cast<std::size_t>(t);
  std::int32_t& there = result_.final_config.raw(ti);
  if (there == Configuration::kSleeping) {
    there = 2;
    if constexpr (Record) rec.woke_target = true;
  } else {
    ++there;
  }
  if (scheduler_ != nullptr && !pending_[ti]) {
    pending_[ti] = 1;
    scheduler_->push(ti);
  }
  return rec;
}

TransitionRecord Stabilizer::topple(std::size_t i) {
  if (i >= box_->size()) throw std::out_of_range("site index out of range");
  if (!result_.final_config.is_active(i)) {
    const Site s = box_->site(i);
    throw std::logic_error("topple on stable site (" + std::to_string(s.x) + "," + std::to_string(s.y) + ")");
  }
  return apply<true>(i);
}

void Stabilizer::run(SchedulerPolicy policy) {
  Scheduler scheduler(policy, *box_);
  scheduler_ = &scheduler;
  const std::size_t n = box_->size();
  for (std::size_t i = 0; i < n; ++i) {
    pending_[i] = 0;
    if (result_.final_config.is_active(i)) {
      pending_[i] = 1;
      scheduler.push(i);
    }
  }
  try {
    while (!scheduler.empty()) {
      const std::size_t i = scheduler.pop();
      pending_[i] = 0;
      while (result_.final_config.raw(i) >= 1) apply<false>(i);
    }
  } catch (...) {
    scheduler_ = nullptr;
    throw;
  }
  scheduler_ = nullptr;
}

StabilizationResult Stabilizer::take_result() && {
  const Configuration& c = result_.final_config;
  for (std::size_t i = 0; i < c.sites(); ++i) result_.sleep_field[i] = c.is_sleeping(i) ? 1 : 0;
  return std::move(result_);
}

StabilizationResult stabilize(const Box& box, const Configuration& initial, const StabilizeOptions& options) {
  Stabilizer s(box, initial, options.seed, SleepRate(options.lambda), options.budget);
  s.run(options.scheduler);
  return std::move(s).take_result();
}

}  // namespace arw
