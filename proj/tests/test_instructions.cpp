#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "arw/instructions.hpp"

using arw::Instruction;
using arw::InstructionStream;
using arw::Site;

namespace {

double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("instruction_at is a pure function of its key") {
  const InstructionStream a(42, {3, -1}, 0.5);
  const InstructionStream b(42, {3, -1}, 0.5);
  for (std::uint64_t k = 1; k <= 1000; ++k) CHECK(a.instruction_at(k) == b.instruction_at(k));

  // Different seeds or sites give different streams.
  const InstructionStream c(43, {3, -1}, 0.5);
  const InstructionStream d(42, {-1, 3}, 0.5);
  int same_c = 0, same_d = 0;
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    same_c += a.instruction_at(k) == c.instruction_at(k);
    same_d += a.instruction_at(k) == d.instruction_at(k);
  }
  CHECK(same_c < 500);
  CHECK(same_d < 500);
}

TEST_CASE("marginal instruction frequencies at lambda = 0.5") {
  constexpr int kSites = 1000, kDraws = 1000;
  const double n = double(kSites) * kDraws;
  std::uint64_t sleeps = 0;
  std::array<std::uint64_t, 4> moves{};
  for (int s = 0; s < kSites; ++s) {
    const InstructionStream st(7, {s % 37 - 18, s / 37}, 0.5);
    for (std::uint64_t k = 1; k <= kDraws; ++k) {
      const Instruction ins = st.instruction_at(k);
      if (ins.is_sleep()) {
        ++sleeps;
      } else {
        ++moves[ins.direction];
      }
    }
  }
  CHECK(std::abs(sleeps / n - 1.0 / 3.0) <= three_sigma(1.0 / 3.0, n));
  for (const auto m : moves) CHECK(std::abs(m / n - 1.0 / 6.0) <= three_sigma(1.0 / 6.0, n));
}

TEST_CASE("consecutive instructions are uncorrelated") {
  // Coded +1 for sleep, -1 for move.
  constexpr int kSites = 1000, kDraws = 1000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int s = 0; s < kSites; ++s) {
    const InstructionStream st(11, {s, -s}, 0.5);
    double prev = st.instruction_at(1).is_sleep() ? 1 : -1;
    for (std::uint64_t k = 2; k <= kDraws + 1; ++k) {
      const double cur = st.instruction_at(k).is_sleep() ? 1 : -1;
      sx += prev, sy += cur, sxx += prev * prev, syy += cur * cur, sxy += prev * cur;
      prev = cur;
    }
  }
  const double n = double(kSites) * kDraws;
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(n));
}

TEST_CASE("movement_count") {
  const InstructionStream st(99, {0, 0}, 0.7);
  for (int d = 0; d < 4; ++d) CHECK(st.movement_count(0, d) == 0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const InstructionStream s(seed, {2, 5}, 0.3);
    for (std::uint64_t m : {1ULL, 7ULL, 100ULL, 10000ULL}) {
      std::uint64_t sum = 0;
      for (int d = 0; d < 4; ++d) sum += s.movement_count(m, d);
      CHECK(sum == m);
    }
  }

  // Hand replay of the first 8 movements.
  std::array<std::uint64_t, 4> replay{};
  int seen = 0;
  for (std::uint64_t k = 1; seen < 8; ++k) {
    const Instruction ins = st.instruction_at(k);
    if (ins.is_sleep()) continue;
    ++replay[ins.direction];
    ++seen;
  }
  for (int d = 0; d < 4; ++d) CHECK(st.movement_count(8, d) == replay[d]);
  CHECK_THROWS_AS(st.movement_count(3, 4), std::invalid_argument);
}

TEST_CASE("chi has mean lambda / (1 + lambda)") {
  constexpr int kSeeds = 100000;
  int ones = 0;
  for (int s = 0; s < kSeeds; ++s) ones += InstructionStream(s, {1, 1}, 0.2).chi(3);
  CHECK(std::abs(ones / double(kSeeds) - 1.0 / 6.0) <= three_sigma(1.0 / 6.0, kSeeds));

  int zero_lambda = 0, tiny_lambda = 0;
  for (int s = 0; s < 10000; ++s) {
    zero_lambda += InstructionStream(s, {0, 0}, 0.0).chi(2);
    tiny_lambda += InstructionStream(s, {0, 0}, 1e-9).chi(2);
  }
  CHECK(zero_lambda == 0);
  CHECK(tiny_lambda == 0);
}

TEST_CASE("chi agrees with a re-scan of the raw stream") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const InstructionStream st(seed, {-4, 2}, 0.6);
    for (std::uint64_t m = 0; m < 40; ++m) {
      // Position of the m-th movement by independent scan.
      std::uint64_t pos = 0, seen = 0;
      while (seen < m) {
        if (!st.instruction_at(++pos).is_sleep()) ++seen;
      }
      CHECK(st.chi(m) == (st.instruction_at(pos + 1).is_sleep() ? 1 : 0));
      CHECK(st.chi(m) == (st.gap(m) > 0 ? 1 : 0));
    }
  }
}

TEST_CASE("gaps are geometric with success 1 / (1 + lambda)") {
  constexpr int kSeeds = 100000;
  int zero_gaps = 0;
  for (int s = 0; s < kSeeds; ++s) zero_gaps += InstructionStream(s, {0, 3}, 1.0).gap(0) == 0;
  CHECK(std::abs(zero_gaps / double(kSeeds) - 0.5) <= three_sigma(0.5, kSeeds));

  // Mean lambda, variance lambda (1 + lambda).
  const double lambda = 0.25;
  double sum = 0;
  for (int s = 0; s < kSeeds; ++s) sum += double(InstructionStream(s, {5, 5}, lambda).gap(4));
  const double sigma = std::sqrt(lambda * (1 + lambda) / kSeeds);
  CHECK(std::abs(sum / kSeeds - lambda) <= 3 * sigma);
}

TEST_CASE("gaps and movements reconstruct the raw stream") {
  const InstructionStream st(5, {1, -2}, 0.8);
  std::vector<Instruction> rebuilt;
  for (std::uint64_t k = 0; k < 200; ++k) {
    for (std::uint64_t g = st.gap(k); g > 0; --g) rebuilt.push_back(Instruction::sleep());
    const std::uint64_t pos = st.movement_position(k + 1);
    rebuilt.push_back(st.instruction_at(pos));
    CHECK(!rebuilt.back().is_sleep());
  }
  for (std::size_t i = 0; i < rebuilt.size(); ++i) CHECK(rebuilt[i] == st.instruction_at(i + 1));
}

TEST_CASE("sleep rate validation") {
  CHECK_THROWS_AS(arw::SleepRate(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(arw::SleepRate(std::nan("")), std::invalid_argument);
  CHECK(arw::SleepRate(0.0).threshold() == 0);
  CHECK(arw::SleepRate(1.0).sleep_probability() == doctest::Approx(0.5));
  CHECK(arw::SleepRate(3.0).threshold() > 0);
}
