// Exact checks of the per-site accounting identities satisfied by every stabilization, and the
// Bernoulli KL divergence / Chernoff bound used to control the number of sleepers.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arw/engine.hpp"
#include "arw/lattice.hpp"

namespace arw {

/// (m, s, phi): movement counts per site, sleeper indicators per site, kills per boundary site.
struct FieldTuple {
  std::vector<std::uint64_t> m;
  std::vector<std::uint8_t> s;
  std::vector<std::uint64_t> phi;

  static FieldTuple from(const StabilizationResult& r) { return {r.odometer, r.sleep_field, r.exit_measure}; }
  static FieldTuple zeros(const Box& box);

  friend bool operator==(const FieldTuple&, const FieldTuple&) = default;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Residual {
  Site site;
  std::int64_t value = 0;
};

struct BalanceReport {
  std::string check;
  std::vector<Residual> failures;  // nonzero residuals only
  std::int64_t conservation_residual = 0;

  bool pass() const { return failures.empty() && conservation_residual == 0; }
  std::int64_t max_abs_residual() const;
};

/// Serialized with the residual list only when the check failed.
nlohmann::json to_json(const BalanceReport& report);

/// n_{x,d}(m_x) for every interior site x.
using CountTable = std::vector<DirectionCounts>;

/// Re-derives n_{x,d}(m_x) by scanning each site's instruction stream up to its m_x-th movement.
CountTable rescan_counts(const Box& box, const std::vector<std::uint64_t>& m, std::uint64_t seed, SleepRate rate);

/// eta0(x) + sum_{y~x} n_{y,x}(m_y) - m_x - s_x at every interior site, in exact integers.
BalanceReport verify_mass_balance(const Box& box, const Configuration& eta0, const FieldTuple& fields,
                                  const CountTable& counts);

/// n_{R(x),x}(m_{R(x)}) - phi_x at every boundary site.
BalanceReport verify_boundary(const Box& box, const FieldTuple& fields, const CountTable& counts);

/// |eta0| - sum s - sum phi.
BalanceReport verify_conservation(const Box& box, const Configuration& eta0, const FieldTuple& fields);

/// Reports every site with s_x > chi_x(m_x).
BalanceReport verify_sleep_domination(const Box& box, const FieldTuple& fields, std::uint64_t seed, SleepRate rate);

enum class CountSource { Engine, Rescan };

/// All four checks on one engine output. With CountSource::Rescan the movement counts are
/// re-derived from the streams instead of taken from the engine's counters.
std::vector<BalanceReport> verify_all(const Box& box, const Configuration& eta0, const StabilizationResult& result,
                                      std::uint64_t seed, SleepRate rate, CountSource source = CountSource::Rescan);
bool all_pass(const std::vector<BalanceReport>& reports);

struct AbelianCheck {
  bool pass = true;
  std::vector<SchedulerPolicy> policies;
  // First divergence from the first policy's result, when any.
  std::optional<std::size_t> diverging_policy;
  std::string field;
  std::optional<Site> site;
};

using StabilizeFn = std::function<StabilizationResult(const Box&, const Configuration&, const StabilizeOptions&)>;

/// Stabilizes once per policy with the same seed and compares (M, S, Phi).
AbelianCheck abelian_check(const Box& box, const Configuration& eta0, StabilizeOptions options,
                           const std::vector<SchedulerPolicy>& policies, const StabilizeFn& run = stabilize);

/// Bernoulli KL divergence D(p1 || p2) with 0 ln 0 = 0. Throws std::domain_error outside
/// p1 in [0,1], p2 in [0,1], or when p2 is 0 or 1 and differs from p1.
double kl_divergence(double p1, double p2);

/// exp(-D(rho || lambda/(1+lambda)) * box_size), held in log space.
class ChernoffBound {
 public:
  ChernoffBound(double rho, double lambda, double box_size);

  double log_value() const { return log_value_; }
  double value() const;

 private:
  double log_value_;
};

/// Throws std::domain_error unless lambda/(1+lambda) < rho <= 1.
ChernoffBound chernoff_bound(double rho, double lambda, double box_size);

}  // namespace arw
