#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

#include "arw/balance.hpp"
#include "arw/experiments.hpp"

using namespace arw;

namespace {

struct Run {
  Box box;
  Configuration eta0;
  StabilizationResult result;
  std::uint64_t seed;
  double lambda;
};

Run random_run(std::mt19937_64& rng, int max_radius = 8) {
  Box box(static_cast<int>(rng() % (max_radius + 1)));
  Configuration c(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) c.set_active(i, static_cast<std::int32_t>(rng() % 2));
  const std::uint64_t seed = rng();
  const double lambda = 0.05 + double(rng() % 100) / 100.0;
  auto r = stabilize(box, c, {seed, lambda, SchedulerPolicy::fifo(), kDefaultBudget});
  return {std::move(box), std::move(c), std::move(r), seed, lambda};
}

// Independent residual computation straight from site arithmetic and stream scans.
std::map<Site, std::int64_t> naive_mass_residuals(const Run& run, const FieldTuple& f) {
  std::map<Site, std::int64_t> out;
  const Box& box = run.box;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Site x = box.site(i);
    std::int64_t inflow = 0;
    for (const Site y : neighbors(x)) {
      if (!box.contains(y)) continue;
      const InstructionStream st(run.seed, y, run.lambda);
      for (int d = 0; d < 4; ++d) {
        if (y.x + kOffsets[d].x == x.x && y.y + kOffsets[d].y == x.y) {
          inflow += static_cast<std::int64_t>(st.movement_count(f.m[box.index(y)], d));
        }
      }
    }
    const std::int64_t r = static_cast<std::int64_t>(run.eta0.particles(i)) + inflow -
                           static_cast<std::int64_t>(f.m[i]) - f.s[i];
    if (r != 0) out[x] = r;
  }
  return out;
}

}  // namespace

TEST_CASE("the empty system balances") {
  const Box box(3);
  const Configuration eta0(box.size());
  const FieldTuple f = FieldTuple::zeros(box);
  const CountTable counts(box.size());
  CHECK(verify_mass_balance(box, eta0, f, counts).pass());
  CHECK(verify_boundary(box, f, counts).pass());
  CHECK(verify_conservation(box, eta0, f).conservation_residual == 0);
  CHECK(verify_sleep_domination(box, f, 1, SleepRate(0.4)).pass());
}

TEST_CASE("engine outputs satisfy every identity exactly") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 100; ++t) {
    const Run run = random_run(rng);
    for (const auto src : {CountSource::Engine, CountSource::Rescan}) {
      const auto reports = verify_all(run.box, run.eta0, run.result, run.seed, SleepRate(run.lambda), src);
      CHECK(all_pass(reports));
      for (const auto& r : reports) CHECK(r.max_abs_residual() == 0);
    }
  }
}

TEST_CASE("conservation on a 17-particle start") {
  const Box box(3);
  Configuration c(box.size());
  c.set_active(box.index({0, 0}), 10);
  c.set_active(box.index({3, 3}), 4);
  c.set_active(box.index({-2, 1}), 3);
  for (const double lambda : {0.0, 0.2, 2.0}) {
    const auto r = stabilize(box, c, {4, lambda, SchedulerPolicy::lifo(), kDefaultBudget});
    CHECK(r.sleeping_total() + r.exit_total() == 17);
    CHECK(verify_conservation(box, c, FieldTuple::from(r)).pass());
  }
}

TEST_CASE("odometer corruption at the origin is caught and residuals match the naive oracle") {
  std::mt19937_64 rng(3);
  Run run = random_run(rng, 0);
  while (run.box.radius() < 2 || run.eta0.total_particles() == 0) run = random_run(rng, 6);
  FieldTuple f = FieldTuple::from(run.result);
  f.m[run.box.index({0, 0})] += 1;
  const auto counts = rescan_counts(run.box, f.m, run.seed, SleepRate(run.lambda));
  const auto report = verify_mass_balance(run.box, run.eta0, f, counts);
  CHECK_FALSE(report.pass());

  const auto expected = naive_mass_residuals(run, f);
  REQUIRE(report.failures.size() == expected.size());
  for (const auto& r : report.failures) CHECK(expected.at(r.site) == r.value);
  CHECK(expected.at(Site{0, 0}) != 0);
}

TEST_CASE("exit-measure corruption fails exactly at the corrupted site") {
  std::mt19937_64 rng(4);
  const Run run = random_run(rng);
  FieldTuple f = FieldTuple::from(run.result);
  const std::size_t b = rng() % run.box.boundary_size();
  f.phi[b] += 2;
  const auto report = verify_boundary(run.box, f, run.result.movement_counts);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].site == run.box.boundary_sites()[b]);
  CHECK(report.failures[0].value == -2);
}

TEST_CASE("single-site corruptions are always detected") {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 300; ++t) {
    const Run run = random_run(rng, 5);
    FieldTuple f = FieldTuple::from(run.result);
    switch (rng() % 3) {
      case 0: {
        const std::size_t i = rng() % f.m.size();
        f.m[i] = f.m[i] == 0 || rng() % 2 ? f.m[i] + 1 + rng() % 3 : f.m[i] - 1;
        break;
      }
      case 1: {
        const std::size_t i = rng() % f.s.size();
        f.s[i] ^= 1;
        break;
      }
      default: {
        const std::size_t b = rng() % f.phi.size();
        f.phi[b] = f.phi[b] == 0 || rng() % 2 ? f.phi[b] + 1 : f.phi[b] - 1;
      }
    }
    const auto counts = rescan_counts(run.box, f.m, run.seed, SleepRate(run.lambda));
    const bool detected = !verify_mass_balance(run.box, run.eta0, f, counts).pass() ||
                          !verify_boundary(run.box, f, counts).pass() ||
                          !verify_conservation(run.box, run.eta0, f).pass() ||
                          !verify_sleep_domination(run.box, f, run.seed, SleepRate(run.lambda)).pass();
    CHECK(detected);
  }
}

TEST_CASE("shape mismatches are rejected") {
  const Box box(2);
  FieldTuple f = FieldTuple::zeros(box);
  f.phi.pop_back();
  CHECK_THROWS_AS(verify_conservation(box, Configuration(box.size()), f), ShapeMismatch);
  CHECK_THROWS_AS(verify_mass_balance(box, Configuration(3), FieldTuple::zeros(box), CountTable(box.size())),
                  ShapeMismatch);
}

TEST_CASE("report serialization carries residuals only on failure") {
  BalanceReport ok{"mass_balance", {}, 0};
  CHECK_FALSE(to_json(ok).contains("residuals"));
  CHECK(to_json(ok)["pass"] == true);
  BalanceReport bad{"boundary", {{{3, 0}, -1}}, 0};
  const auto j = to_json(bad);
  CHECK(j["pass"] == false);
  CHECK(j["residuals"].size() == 1);
  CHECK(j["residuals"][0]["x"] == 3);
}

TEST_CASE("abelian check") {
  const Box box(0);
  Configuration c(1);
  c.set_active(0, 1);
  const StabilizeOptions opt{9, 0.4, SchedulerPolicy::fifo(), kDefaultBudget};
  CHECK(abelian_check(box, c, opt, {SchedulerPolicy::fifo(), SchedulerPolicy::lifo()}).pass);

  const Box big(4);
  Configuration full(big.size());
  for (std::size_t i = 0; i < big.size(); ++i) full.set_active(i, 1);
  CHECK(abelian_check(big, full, opt, all_policies(3)).pass);

  // A mutant engine that draws fresh stacks per policy.
  const StabilizeFn mutant = [](const Box& b, const Configuration& e, const StabilizeOptions& o) {
    StabilizeOptions m = o;
    m.seed ^= static_cast<std::uint64_t>(o.scheduler.kind) * 0x9e3779b97f4a7c15ULL;
    return stabilize(b, e, m);
  };
  const auto check = abelian_check(big, full, opt, all_policies(3), mutant);
  CHECK_FALSE(check.pass);
  CHECK(check.diverging_policy.has_value());
  CHECK(check.site.has_value());

  CHECK_THROWS_AS(abelian_check(box, c, opt, {SchedulerPolicy::fifo()}), std::invalid_argument);
}

TEST_CASE("kl divergence") {
  for (const double p : {0.1, 0.5, 0.9}) CHECK(kl_divergence(p, p) == 0.0);
  for (const double q : {0.01, 0.25, 0.7}) {
    CHECK(kl_divergence(1.0, q) == doctest::Approx(std::log(1.0 / q)).epsilon(1e-14));
    CHECK(kl_divergence(0.0, q) == doctest::Approx(std::log(1.0 / (1.0 - q))).epsilon(1e-14));
  }
  // 0.5 ln 2 + 0.5 ln(2/3), evaluated at 40 digits.
  CHECK(std::abs(kl_divergence(0.5, 0.25) - 0.1438410362258904637) < 1e-15);

  for (int i = 0; i <= 9; ++i) {
    for (int j = 1; j <= 10; ++j) {
      const double p1 = i / 9.0, p2 = j / 11.0;
      const double d = kl_divergence(p1, p2);
      CHECK(d >= 0.0);
      if (std::abs(p1 - p2) > 1e-9) CHECK(d > 1e-12);
    }
  }
  CHECK_THROWS_AS(kl_divergence(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(kl_divergence(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(kl_divergence(1.5, 0.3), std::domain_error);
  CHECK(kl_divergence(0.0, 0.0) == 0.0);
}

TEST_CASE("chernoff bound") {
  const double lambda = 1.0 / 3.0, q = 0.25;
  CHECK(chernoff_bound(1.0, lambda, 25).log_value() == doctest::Approx(25 * std::log(q)).epsilon(1e-14));
  CHECK(chernoff_bound(0.7, lambda, 0).value() == 1.0);
  CHECK(std::abs(chernoff_bound(0.5, lambda, 9).value() - 0.27401585041617004) < 1e-12);

  // Deep tails stay finite in log space.
  CHECK(std::isfinite(chernoff_bound(0.9, 0.01, 1e6).log_value()));
  CHECK(chernoff_bound(0.9, 0.01, 1e6).value() == 0.0);

  double prev = 0.0;
  for (double size = 1; size <= 1e5; size *= 3) {
    const double lv = chernoff_bound(0.6, 0.2, size).log_value();
    CHECK(lv < prev);
    prev = lv;
  }
  prev = 0.0;
  for (double rho = 0.2; rho <= 1.0; rho += 0.05) {
    const double lv = chernoff_bound(rho, 0.2, 100).log_value();
    CHECK(lv < prev);
    prev = lv;
  }
  CHECK_THROWS_AS(chernoff_bound(0.25, lambda, 9), std::domain_error);
  CHECK_THROWS_AS(chernoff_bound(0.1, lambda, 9), std::domain_error);
  CHECK_THROWS_AS(chernoff_bound(1.1, lambda, 9), std::domain_error);
}
