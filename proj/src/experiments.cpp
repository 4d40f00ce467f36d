#include "arw/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "arw/balance.hpp"
#include "arw/counter_rng.hpp"
#include "arw/instructions.hpp"

namespace arw {

namespace {

constexpr std::uint64_t kInitSalt = 0x1d1e5eedULL;

std::int32_t poisson_inverse_cdf(double u, double zeta) {
  // Sequential search; zeta is a density of order one.
  double p = std::exp(-zeta);
  double cdf = p;
  std::int32_t k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= zeta / k;
    cdf += p;
  }
  return k;
}

}  // namespace

std::string describe(const InitialCondition& init) {
  std::ostringstream os;
  switch (init.kind) {
    case InitialCondition::Kind::FullOccupancy: return "full";
    case InitialCondition::Kind::BernoulliProduct: os << "bernoulli(" << init.zeta << ")"; return os.str();
    case InitialCondition::Kind::PoissonProduct: os << "poisson(" << init.zeta << ")"; return os.str();
    case InitialCondition::Kind::SingleAtOrigin: return "single";
    case InitialCondition::Kind::Explicit: os << "explicit(" << init.sites.size() << " sites)"; return os.str();
  }
  return "unknown";
}

InitialCondition load_initial_condition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open initial condition file " + path);
  std::vector<std::pair<Site, std::int32_t>> sites;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Site s;
    std::int64_t count = 0;
    if (!(ls >> s.x)) continue;
    std::string rest;
    if (!(ls >> s.y >> count) || (ls >> rest) || count < 0 || count > std::numeric_limits<std::int32_t>::max()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'x y count'");
    }
    sites.emplace_back(s, static_cast<std::int32_t>(count));
  }
  return InitialCondition::explicit_sites(std::move(sites));
}

Configuration sample_initial(const InitialCondition& init, const Box& box, std::uint64_t seed) {
  Configuration c(box.size());
  const auto uniform_at = [&](std::size_t i) { return to_unit(hash_combine(seed, site_key(box.site(i)))); };
  switch (init.kind) {
    case InitialCondition::Kind::FullOccupancy:
      for (std::size_t i = 0; i < box.size(); ++i) c.set_active(i, 1);
      break;
    case InitialCondition::Kind::BernoulliProduct:
      if (!(init.zeta >= 0.0 && init.zeta <= 1.0)) throw std::invalid_argument("Bernoulli density must lie in [0, 1]");
      for (std::size_t i = 0; i < box.size(); ++i) c.set_active(i, uniform_at(i) < init.zeta ? 1 : 0);
      break;
    case InitialCondition::Kind::PoissonProduct:
      if (!(init.zeta >= 0.0) || !std::isfinite(init.zeta)) throw std::invalid_argument("Poisson density must be >= 0");
      for (std::size_t i = 0; i < box.size(); ++i) c.set_active(i, poisson_inverse_cdf(uniform_at(i), init.zeta));
      break;
    case InitialCondition::Kind::SingleAtOrigin:
      c.set_active(box.index({0, 0}), 1);
      break;
    case InitialCondition::Kind::Explicit:
      for (const auto& [s, n] : init.sites) {
        if (!box.contains(s)) throw std::invalid_argument("explicit initial condition has a site outside the box");
        const std::size_t i = box.index(s);
        c.set_active(i, c.active_count(i) + n);
      }
      break;
  }
  return c;
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) { return hash_combine(master, replica); }

std::uint64_t initial_condition_seed(std::uint64_t rs) { return hash_combine(rs, kInitSalt); }

ReplicaFailure::ReplicaFailure(std::size_t replica, const std::string& what)
    : std::runtime_error("replica " + std::to_string(replica) + ": " + what), replica_(replica) {}

ReplicaOutcome run_replica(const Box& box, const SimParams& params, std::uint64_t replica) {
  const std::uint64_t rs = replica_seed(params.seed, replica);
  const Configuration eta0 = sample_initial(params.init, box, initial_condition_seed(rs));
  StabilizeOptions opt{rs, params.lambda, params.scheduler, params.budget};
  if (opt.scheduler.kind == SchedulerPolicy::Kind::UniformRandom) opt.scheduler.seed = rs;

  StabilizationResult res;
  try {
    res = stabilize(box, eta0, opt);
  } catch (const BudgetExceeded& e) {
    throw ReplicaFailure(replica, e.what());
  }

  ReplicaOutcome out;
  out.replica = replica;
  out.seed = rs;
  out.particles = eta0.total_particles();
  out.sleeping = res.sleeping_total();
  out.exited = res.exit_total();
  out.odometer_total = res.odometer_total();
  out.instructions = res.total_instructions;
  if (params.verify_every > 0 && replica % params.verify_every == 0) {
    const auto reports = verify_all(box, eta0, res, rs, SleepRate(params.lambda), CountSource::Rescan);
    for (const auto& r : reports) {
      if (!r.pass()) throw ReplicaFailure(replica, "identity check '" + r.check + "' failed");
    }
    out.verified = true;
  }
  return out;
}

std::vector<ReplicaOutcome> run_replicas_serial(const SimParams& params) {
  const Box box(params.radius);
  std::vector<ReplicaOutcome> out(params.replicas);
  for (std::size_t r = 0; r < params.replicas; ++r) out[r] = run_replica(box, params, r);
  return out;
}

std::vector<ReplicaOutcome> run_replicas_parallel(const SimParams& params) {
  const Box box(params.radius);
  const auto n = static_cast<std::int64_t>(params.replicas);
  std::vector<ReplicaOutcome> out(params.replicas);
  std::exception_ptr error;
  std::int64_t first_failed = n;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t r = 0; r < n; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = run_replica(box, params, static_cast<std::uint64_t>(r));
    } catch (...) {
#pragma omp critical(arw_replica_error)
      {
        if (r < first_failed) {
          first_failed = r;
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<ReplicaOutcome> run_replicas(const SimParams& params, Execution mode) {
  if (params.replicas == 0) throw std::invalid_argument("at least one replica is required");
  return mode == Execution::Serial ? run_replicas_serial(params) : run_replicas_parallel(params);
}

Interval wilson_interval(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Exact endpoints at p = 0 and p = 1 so lo <= p_hat <= hi survives rounding.
  const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return {std::min(lo, p), std::max(hi, p)};
}

TailEstimate estimate_tail(const SimParams& params, double rho, Execution mode) {
  if (!(rho > 0.0)) throw std::invalid_argument("tail threshold rho must be positive");
  const Box box(params.radius);
  TailEstimate t;
  t.rho = rho;
  t.box_size = box.size();
  t.outcomes = run_replicas(params, mode);
  t.replicas = t.outcomes.size();
  const double threshold = rho * static_cast<double>(box.size());
  for (const auto& o : t.outcomes) t.hits += static_cast<double>(o.sleeping) >= threshold ? 1 : 0;
  t.p_hat = static_cast<double>(t.hits) / static_cast<double>(t.replicas);
  t.wilson = wilson_interval(t.hits, t.replicas);
  try {
    t.chernoff_log_bound = chernoff_bound(rho, params.lambda, static_cast<double>(box.size())).log_value();
  } catch (const std::domain_error&) {
    t.chernoff_log_bound.reset();
  }
  return t;
}

std::vector<DensityCurvePoint> density_curve(std::vector<double> lambdas, std::vector<double> zetas, int radius,
                                             std::size_t replicas, std::uint64_t seed, std::uint64_t budget,
                                             Execution mode) {
  if (lambdas.empty() || zetas.empty()) throw std::invalid_argument("density_curve needs non-empty grids");
  std::sort(lambdas.begin(), lambdas.end());
  std::sort(zetas.begin(), zetas.end());
  const double sites = static_cast<double>(Box(radius).size());
  std::vector<DensityCurvePoint> out;
  out.reserve(lambdas.size() * zetas.size());
  for (const double lambda : lambdas) {
    for (const double zeta : zetas) {
      SimParams p;
      p.radius = radius;
      p.lambda = lambda;
      p.init = InitialCondition::poisson(zeta);
      p.seed = seed;
      p.budget = budget;
      p.replicas = replicas;
      const auto outcomes = run_replicas(p, mode);
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& o : outcomes) {
        const double d = static_cast<double>(o.sleeping) / sites;
        sum += d;
        sum_sq += d * d;
      }
      const double n = static_cast<double>(outcomes.size());
      const double mean = sum / n;
      const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
      out.push_back({lambda, zeta, radius, outcomes.size(), mean, std::sqrt(var / n)});
    }
  }
  return out;
}

double retained_fraction(double lambda, double zeta, int radius, std::size_t replicas, std::uint64_t seed,
                         std::uint64_t budget, Execution mode) {
  SimParams p;
  p.radius = radius;
  p.lambda = lambda;
  p.init = InitialCondition::poisson(zeta);
  p.seed = seed;
  p.budget = budget;
  p.replicas = replicas;
  std::uint64_t kept = 0, total = 0;
  for (const auto& o : run_replicas(p, mode)) {
    kept += o.sleeping;
    total += o.particles;
  }
  return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
}

ZetaCEstimate estimate_zeta_c(double lambda, int radius, std::size_t replicas, double tolerance, std::uint64_t seed,
                              std::uint64_t budget, Execution mode) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  ZetaCEstimate est;
  auto eval = [&](double zeta) {
    const double f = retained_fraction(lambda, zeta, radius, replicas, seed, budget, mode);
    est.evaluations.emplace_back(zeta, f);
    return f;
  };

  const double top = eval(1.0);
  if (top > 0.5) {
    est.note = "retained fraction stays above 1/2 up to zeta = 1";
    return est;
  }
  double lo = std::min(tolerance, 0.5);
  if (eval(lo) <= 0.5) {
    est.note = "retained fraction is at most 1/2 already at zeta = " + std::to_string(lo);
    return est;
  }
  double hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) > 0.5 ? lo : hi) = mid;
  }
  est.bracketed = true;
  est.interval = {lo, hi};
  return est;
}

OracleSolution solve_exit_probability(double lambda, int radius, double tolerance) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  const Box box(radius);
  const std::size_t n = box.size();
  const double w = 0.25 / (1.0 + lambda);
  OracleSolution sol;
  sol.exit_probability.assign(n, 0.0);
  auto& u = sol.exit_probability;

  auto neighbor_sum = [&](std::size_t i) {
    double acc = 0.0;
    for (int d = 0; d < kDirections; ++d) {
      const std::int64_t t = box.step(i, d);
      acc += t < 0 ? 1.0 : u[static_cast<std::size_t>(t)];
    }
    return acc;
  };

  constexpr std::size_t kMaxSweeps = 50'000'000;
  for (sol.sweeps = 1; sol.sweeps <= kMaxSweeps; ++sol.sweeps) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = w * neighbor_sum(i);
      change = std::max(change, std::abs(next - u[i]));
      u[i] = next;
    }
    if (change <= tolerance) break;
  }
  sol.residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.residual = std::max(sol.residual, std::abs(u[i] - w * neighbor_sum(i)));
  if (sol.residual > tolerance * 10.0) throw std::runtime_error("Gauss-Seidel did not reach the requested residual");
  return sol;
}

double single_particle_oracle(double lambda, int radius) {
  const Box box(radius);
  const auto sol = solve_exit_probability(lambda, radius);
  return 1.0 - sol.exit_probability[box.index({0, 0})];
}

}  // namespace arw
