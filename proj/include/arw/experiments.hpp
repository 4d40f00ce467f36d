// Monte Carlo harness: initial conditions, replica kernels and the statistics built on them.
//
// Replicas are independent stabilizations keyed on replica_seed(master, r). The serial and
// OpenMP kernels produce identical outcome vectors; every statistic is reduced in replica order.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arw/engine.hpp"
#include "arw/lattice.hpp"
#include "arw/scheduler.hpp"

namespace arw {

struct InitialCondition {
  enum class Kind : std::uint8_t { FullOccupancy, BernoulliProduct, PoissonProduct, Explicit, SingleAtOrigin };

  Kind kind = Kind::FullOccupancy;
  double zeta = 0.0;
  std::vector<std::pair<Site, std::int32_t>> sites;  // Explicit only

  static InitialCondition full() { return {Kind::FullOccupancy, 1.0, {}}; }
  static InitialCondition bernoulli(double zeta) { return {Kind::BernoulliProduct, zeta, {}}; }
  static InitialCondition poisson(double zeta) { return {Kind::PoissonProduct, zeta, {}}; }
  static InitialCondition single() { return {Kind::SingleAtOrigin, 0.0, {}}; }
  static InitialCondition explicit_sites(std::vector<std::pair<Site, std::int32_t>> s) {
    return {Kind::Explicit, 0.0, std::move(s)};
  }
};

std::string describe(const InitialCondition& init);

/// Reads "x y count" lines; '#' starts a comment. Throws std::runtime_error on malformed input.
InitialCondition load_initial_condition(const std::string& path);

/// All particles start active. Sites of an Explicit condition outside the box are rejected.
Configuration sample_initial(const InitialCondition& init, const Box& box, std::uint64_t seed);

struct SimParams {
  int radius = 0;
  double lambda = 0.0;
  InitialCondition init = InitialCondition::full();
  std::uint64_t seed = 0;
  SchedulerPolicy scheduler = SchedulerPolicy::fifo();
  std::uint64_t budget = kDefaultBudget;
  std::size_t replicas = 1;
  /// Verify the balance identities on every k-th replica (0 disables, 1 checks all).
  std::size_t verify_every = 0;
};

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica);
std::uint64_t initial_condition_seed(std::uint64_t replica_seed);

struct ReplicaOutcome {
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  std::uint64_t particles = 0;
  std::uint64_t sleeping = 0;
  std::uint64_t exited = 0;
  std::uint64_t odometer_total = 0;
  std::uint64_t instructions = 0;
  bool verified = false;

  friend bool operator==(const ReplicaOutcome&, const ReplicaOutcome&) = default;
};

/// A replica failed (budget exhausted or an identity violated).
class ReplicaFailure : public std::runtime_error {
 public:
  ReplicaFailure(std::size_t replica, const std::string& what);
  std::size_t replica() const { return replica_; }

 private:
  std::size_t replica_;
};

enum class Execution { Serial, Parallel };

ReplicaOutcome run_replica(const Box& box, const SimParams& params, std::uint64_t replica);

/// Outcome r is always replica r. The serial kernel is the reference for the parallel one.
std::vector<ReplicaOutcome> run_replicas_serial(const SimParams& params);
std::vector<ReplicaOutcome> run_replicas_parallel(const SimParams& params);
std::vector<ReplicaOutcome> run_replicas(const SimParams& params, Execution mode = Execution::Parallel);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion, 95% by default.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

struct TailEstimate {
  double rho = 0.0;
  double p_hat = 0.0;
  std::size_t hits = 0;
  std::size_t replicas = 0;
  std::size_t box_size = 0;
  Interval wilson;
  /// log of the Chernoff bound on the sleep-indicator sum; empty when the bound is vacuous.
  std::optional<double> chernoff_log_bound;
  std::vector<ReplicaOutcome> outcomes;
};

/// Fraction of replicas with S(B_N) >= rho |B_N|.
TailEstimate estimate_tail(const SimParams& params, double rho, Execution mode = Execution::Parallel);

struct DensityCurvePoint {
  double lambda = 0.0;
  double zeta = 0.0;
  int radius = 0;
  std::size_t replicas = 0;
  double mean_density = 0.0;  // E[S(B_N)] / |B_N|
  double std_error = 0.0;
};

/// Poisson(zeta) initial conditions; one point per (lambda, zeta), sorted by (lambda, zeta).
/// Every grid point reuses the same master seed.
std::vector<DensityCurvePoint> density_curve(std::vector<double> lambdas, std::vector<double> zetas, int radius,
                                             std::size_t replicas, std::uint64_t seed,
                                             std::uint64_t budget = kDefaultBudget,
                                             Execution mode = Execution::Parallel);

inline constexpr std::string_view kHeuristicLabel = "HEURISTIC";

struct ZetaCEstimate {
  bool bracketed = false;
  Interval interval{0.0, 1.0};
  std::string label{kHeuristicLabel};
  std::string note;
  std::vector<std::pair<double, double>> evaluations;  // (zeta, retained fraction)
};

/// Pooled retained fraction sum(S) / sum(|eta0|) over replicas with Poisson(zeta) starts.
double retained_fraction(double lambda, double zeta, int radius, std::size_t replicas, std::uint64_t seed,
                         std::uint64_t budget = kDefaultBudget, Execution mode = Execution::Parallel);

/// Finite-volume heuristic for the critical density: bisection on zeta in [0, 1] for the point
/// where the retained fraction drops to 1/2. This is a desk-scale surrogate, not an estimate with
/// any guarantee, and every report carries kHeuristicLabel.
ZetaCEstimate estimate_zeta_c(double lambda, int radius, std::size_t replicas, double tolerance, std::uint64_t seed,
                              std::uint64_t budget = kDefaultBudget, Execution mode = Execution::Parallel);

struct OracleSolution {
  std::vector<double> exit_probability;  // u(x) on the box, row-major like Box::index
  double residual = 0.0;
  std::size_t sweeps = 0;
};

/// Gauss-Seidel solution of u(x) = (1/(1+lambda)) (1/4) sum_{y~x} u(y) on the box, u = 1 outside.
/// u(x) is the probability that a lone particle started at x leaves the box before sleeping.
OracleSolution solve_exit_probability(double lambda, int radius, double tolerance = 1e-13);

/// Probability that a lone particle started at the origin ends asleep: 1 - u(0).
double single_particle_oracle(double lambda, int radius);

}  // namespace arw
