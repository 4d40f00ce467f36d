#include "arw/scheduler.hpp"

#include <stdexcept>
#include <utility>

namespace arw {

std::string_view policy_name(SchedulerPolicy policy) {
  switch (policy.kind) {
    case SchedulerPolicy::Kind::Fifo: return "fifo";
    case SchedulerPolicy::Kind::Lifo: return "lifo";
    case SchedulerPolicy::Kind::UniformRandom: return "random";
    case SchedulerPolicy::Kind::CycleSweep: return "cycle";
  }
  return "unknown";
}

std::optional<SchedulerPolicy> parse_policy(std::string_view name, std::uint64_t seed) {
  if (name == "fifo") return SchedulerPolicy::fifo();
  if (name == "lifo") return SchedulerPolicy::lifo();
  if (name == "random") return SchedulerPolicy::uniform_random(seed);
  if (name == "cycle") return SchedulerPolicy::cycle_sweep();
  return std::nullopt;
}

std::vector<SchedulerPolicy> all_policies(std::uint64_t seed) {
  return {SchedulerPolicy::fifo(), SchedulerPolicy::lifo(), SchedulerPolicy::uniform_random(seed),
          SchedulerPolicy::cycle_sweep()};
}

Scheduler::Scheduler(SchedulerPolicy policy, const Box& box)
    : policy_(policy), box_(&box), rng_(policy.seed) {}

void Scheduler::push(std::size_t site) {
  switch (policy_.kind) {
    case SchedulerPolicy::Kind::Fifo: queue_.push_back(site); break;
    case SchedulerPolicy::Kind::Lifo:
    case SchedulerPolicy::Kind::UniformRandom: stack_.push_back(site); break;
    case SchedulerPolicy::Kind::CycleSweep: ranks_.push(box_->sweep_rank(site)); break;
  }
}

std::size_t Scheduler::pop() {
  if (empty()) throw std::logic_error("pop from an empty scheduler");
  std::size_t out = 0;
  switch (policy_.kind) {
    case SchedulerPolicy::Kind::Fifo:
      out = queue_.front();
      queue_.pop_front();
      break;
    case SchedulerPolicy::Kind::Lifo:
      out = stack_.back();
      stack_.pop_back();
      break;
    case SchedulerPolicy::Kind::UniformRandom: {
      std::uniform_int_distribution<std::size_t> pick(0, stack_.size() - 1);
      const std::size_t k = pick(rng_);
      out = stack_[k];
      stack_[k] = stack_.back();
      stack_.pop_back();
      break;
    }
    case SchedulerPolicy::Kind::CycleSweep:
      out = box_->sweep_order()[ranks_.top()];
      ranks_.pop();
      break;
  }
  return out;
}

bool Scheduler::empty() const { return size() == 0; }

std::size_t Scheduler::size() const {
  switch (policy_.kind) {
    case SchedulerPolicy::Kind::Fifo: return queue_.size();
    case SchedulerPolicy::Kind::Lifo:
    case SchedulerPolicy::Kind::UniformRandom: return stack_.size();
    case SchedulerPolicy::Kind::CycleSweep: return ranks_.size();
  }
  return 0;
}

}  // namespace arw
