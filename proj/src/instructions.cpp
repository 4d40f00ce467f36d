#include "arw/instructions.hpp"

#include <cmath>
#include <stdexcept>

namespace arw {

SleepRate::SleepRate(double lambda) : lambda_(lambda), threshold_(0) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("sleep rate must be a finite non-negative number");
  }
  threshold_ = static_cast<std::uint64_t>(std::llround(sleep_probability() * 0x1.0p53));
}

std::uint64_t InstructionStream::movement_position(std::uint64_t m) const {
  std::uint64_t pos = 0;
  for (std::uint64_t seen = 0; seen < m;) {
    if (!instruction_at(++pos).is_sleep()) ++seen;
  }
  return pos;
}

std::uint64_t InstructionStream::movement_count(std::uint64_t m, int d) const {
  if (d < 0 || d >= kDirections) throw std::invalid_argument("direction out of range");
  std::uint64_t count = 0;
  std::uint64_t pos = 0;
  for (std::uint64_t seen = 0; seen < m;) {
    const Instruction ins = instruction_at(++pos);
    if (ins.is_sleep()) continue;
    ++seen;
    if (ins.direction == d) ++count;
  }
  return count;
}

int InstructionStream::chi(std::uint64_t m) const {
  return instruction_at(movement_position(m) + 1).is_sleep() ? 1 : 0;
}

std::uint64_t InstructionStream::gap(std::uint64_t k) const {
  if (rate_.threshold() >= (std::uint64_t{1} << 53)) {
    throw std::domain_error("gap is unbounded when every instruction is a sleep");
  }
  std::uint64_t pos = movement_position(k);
  std::uint64_t run = 0;
  while (instruction_at(++pos).is_sleep()) ++run;
  return run;
}

}  // namespace arw
