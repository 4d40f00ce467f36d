#include "arw/balance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace arw {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeMismatch(std::string("field shape mismatch: ") + what);
}

void check_shapes(const Box& box, const FieldTuple& f) {
  require(f.m.size() == box.size(), "m");
  require(f.s.size() == box.size(), "s");
  require(f.phi.size() == box.boundary_size(), "phi");
}

std::int64_t as_signed(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

FieldTuple FieldTuple::zeros(const Box& box) {
  return {std::vector<std::uint64_t>(box.size(), 0), std::vector<std::uint8_t>(box.size(), 0),
          std::vector<std::uint64_t>(box.boundary_size(), 0)};
}

std::int64_t BalanceReport::max_abs_residual() const {
  std::int64_t best = std::llabs(conservation_residual);
  for (const Residual& r : failures) best = std::max<std::int64_t>(best, std::llabs(r.value));
  return best;
}

nlohmann::json to_json(const BalanceReport& report) {
  nlohmann::json j{{"check", report.check},
                   {"pass", report.pass()},
                   {"max_abs_residual", report.max_abs_residual()},
                   {"conservation_residual", report.conservation_residual}};
  if (!report.pass()) {
    auto& list = j["residuals"] = nlohmann::json::array();
    for (const Residual& r : report.failures) list.push_back({{"x", r.site.x}, {"y", r.site.y}, {"residual", r.value}});
  }
  return j;
}

CountTable rescan_counts(const Box& box, const std::vector<std::uint64_t>& m, std::uint64_t seed, SleepRate rate) {
  require(m.size() == box.size(), "m");
  CountTable out(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const InstructionStream stream(seed, box.site(i), rate);
    DirectionCounts c{};
    std::uint64_t pos = 0;
    for (std::uint64_t seen = 0; seen < m[i];) {
      const Instruction ins = stream.instruction_at(++pos);
      if (ins.is_sleep()) continue;
      ++seen;
      ++c[ins.direction];
    }
    out[i] = c;
  }
  return out;
}

BalanceReport verify_mass_balance(const Box& box, const Configuration& eta0, const FieldTuple& fields,
                                  const CountTable& counts) {
  check_shapes(box, fields);
  require(eta0.sites() == box.size(), "eta0");
  require(counts.size() == box.size(), "counts");
  BalanceReport report{"mass_balance", {}, 0};
  for (std::size_t i = 0; i < box.size(); ++i) {
    std::int64_t inflow = 0;
    for (int d = 0; d < kDirections; ++d) {
      const std::int64_t t = box.step(i, d);
      // The neighbor in direction d reaches i by moving in the opposite direction.
      if (t >= 0) inflow += as_signed(counts[static_cast<std::size_t>(t)][opposite(d)]);
    }
    const std::int64_t r = as_signed(eta0.particles(i)) + inflow - as_signed(fields.m[i]) - fields.s[i];
    if (r != 0) report.failures.push_back({box.site(i), r});
  }
  return report;
}

BalanceReport verify_boundary(const Box& box, const FieldTuple& fields, const CountTable& counts) {
  check_shapes(box, fields);
  require(counts.size() == box.size(), "counts");
  BalanceReport report{"boundary", {}, 0};
  const auto& sites = box.boundary_sites();
  for (std::size_t b = 0; b < sites.size(); ++b) {
    const Site x = sites[b];
    const Site inner = interior_neighbor(x, box);
    const int d = [&] {
      for (int k = 0; k < kDirections; ++k) {
        if (inner.x + kOffsets[k].x == x.x && inner.y + kOffsets[k].y == x.y) return k;
      }
      return -1;
    }();
    const std::int64_t r = as_signed(counts[box.index(inner)][d]) - as_signed(fields.phi[b]);
    if (r != 0) report.failures.push_back({x, r});
  }
  return report;
}

BalanceReport verify_conservation(const Box& box, const Configuration& eta0, const FieldTuple& fields) {
  check_shapes(box, fields);
  require(eta0.sites() == box.size(), "eta0");
  std::int64_t r = as_signed(eta0.total_particles());
  for (const auto s : fields.s) r -= s;
  for (const auto p : fields.phi) r -= as_signed(p);
  return {"conservation", {}, r};
}

BalanceReport verify_sleep_domination(const Box& box, const FieldTuple& fields, std::uint64_t seed, SleepRate rate) {
  check_shapes(box, fields);
  BalanceReport report{"sleep_domination", {}, 0};
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (fields.s[i] > 1) {
      report.failures.push_back({box.site(i), fields.s[i]});
      continue;
    }
    if (fields.s[i] == 0) continue;
    const InstructionStream stream(seed, box.site(i), rate);
    if (stream.chi(fields.m[i]) == 0) report.failures.push_back({box.site(i), 1});
  }
  return report;
}

std::vector<BalanceReport> verify_all(const Box& box, const Configuration& eta0, const StabilizationResult& result,
                                      std::uint64_t seed, SleepRate rate, CountSource source) {
  const FieldTuple fields = FieldTuple::from(result);
  const CountTable counts =
      source == CountSource::Engine ? result.movement_counts : rescan_counts(box, fields.m, seed, rate);
  return {verify_mass_balance(box, eta0, fields, counts), verify_boundary(box, fields, counts),
          verify_conservation(box, eta0, fields), verify_sleep_domination(box, fields, seed, rate)};
}

bool all_pass(const std::vector<BalanceReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const BalanceReport& r) { return r.pass(); });
}

AbelianCheck abelian_check(const Box& box, const Configuration& eta0, StabilizeOptions options,
                           const std::vector<SchedulerPolicy>& policies, const StabilizeFn& run) {
  if (policies.size() < 2) throw std::invalid_argument("abelian_check needs at least two policies");
  AbelianCheck out;
  out.policies = policies;
  options.scheduler = policies.front();
  const StabilizationResult ref = run(box, eta0, options);
  for (std::size_t p = 1; p < policies.size(); ++p) {
    options.scheduler = policies[p];
    const StabilizationResult other = run(box, eta0, options);
    auto first_diff = [&](const auto& a, const auto& b) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) return i;
      }
      if (a.size() != b.size()) return std::min(a.size(), b.size());
      return std::nullopt;
    };
    if (auto i = first_diff(ref.odometer, other.odometer)) {
      out.field = "M";
      out.site = box.site(*i);
    } else if (auto j = first_diff(ref.sleep_field, other.sleep_field)) {
      out.field = "S";
      out.site = box.site(*j);
    } else if (auto b = first_diff(ref.exit_measure, other.exit_measure)) {
      out.field = "Phi";
      if (*b < box.boundary_size()) out.site = box.boundary_sites()[*b];
    } else {
      continue;
    }
    out.pass = false;
    out.diverging_policy = p;
    return out;
  }
  return out;
}

double kl_divergence(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0)) {
    throw std::domain_error("kl_divergence: probabilities must lie in [0, 1]");
  }
  if (p1 == p2) return 0.0;
  if (p2 == 0.0 || p2 == 1.0) throw std::domain_error("kl_divergence: infinite divergence");
  double d = 0.0;
  if (p1 > 0.0) d += p1 * std::log(p1 / p2);
  if (p1 < 1.0) d += (1.0 - p1) * std::log1p(-p1) - (1.0 - p1) * std::log1p(-p2);
  return d < 0.0 ? 0.0 : d;
}

ChernoffBound::ChernoffBound(double rho, double lambda, double box_size) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::domain_error("chernoff_bound: invalid sleep rate");
  if (!(box_size >= 0.0)) throw std::domain_error("chernoff_bound: negative box size");
  const double q = lambda / (1.0 + lambda);
  if (!(rho > q) || rho > 1.0) {
    throw std::domain_error("chernoff_bound: density must lie in (lambda/(1+lambda), 1]");
  }
  log_value_ = box_size == 0.0 ? 0.0 : -kl_divergence(rho, q) * box_size;
}

double ChernoffBound::value() const { return std::exp(log_value_); }

ChernoffBound chernoff_bound(double rho, double lambda, double box_size) { return {rho, lambda, box_size}; }

}  // namespace arw
