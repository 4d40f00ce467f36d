#include "arw/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "arw/balance.hpp"
#include "arw/counter_rng.hpp"

namespace arw::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands{"stabilize", "abelian-check", "tail", "curve", "zeta-c", "oracle-check"};

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string short_num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ << ',';
      body_ << csv_field(cells[i]);
    }
    body_ << "\r\n";
  }

  std::string str() const { return body_.str(); }

 private:
  std::size_t width_;
  std::ostringstream body_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

InitialCondition parse_init(const std::string& spec, std::optional<double> zeta) {
  if (spec == "full") return InitialCondition::full();
  if (spec == "single") return InitialCondition::single();
  if (spec == "bernoulli" || spec == "poisson") {
    if (!zeta) throw UsageError("--init " + spec + " requires --zeta");
    if (spec == "bernoulli" && *zeta > 1.0) throw UsageError("--zeta: Bernoulli density must be at most 1");
    return spec == "bernoulli" ? InitialCondition::bernoulli(*zeta) : InitialCondition::poisson(*zeta);
  }
  if (spec.rfind("file=", 0) == 0) {
    const std::string path = spec.substr(5);
    if (path.empty()) throw UsageError("--init file= needs a path");
    try {
      return load_initial_condition(path);
    } catch (const std::runtime_error& e) {
      throw UsageError(std::string("--init: ") + e.what());
    }
  }
  throw UsageError("--init: unknown initial condition '" + spec + "'");
}

json params_json(const Command& c) {
  json j{{"command", c.name},
         {"N", c.radius},
         {"lambda", c.lambda},
         {"seed", c.seed},
         {"scheduler", c.scheduler_name},
         {"init", c.init_spec},
         {"replicas", c.replicas},
         {"budget", c.budget},
         {"generator", std::string(kGeneratorId)}};
  if (c.zeta) j["zeta"] = *c.zeta;
  if (c.name == "tail") j["rho"] = c.rho;
  if (c.name == "curve") {
    j["lambdas"] = c.lambdas;
    j["zetas"] = c.zetas;
  }
  if (c.name == "zeta-c") j["tolerance"] = c.tolerance;
  if (c.verify_every) j["verify_every"] = c.verify_every;
  return j;
}

void echo_params(const Command& c, std::ostream& out) {
  out << "# arw " << c.name << " N=" << c.radius << " lambda=" << exact(c.lambda) << " seed=" << c.seed
      << " scheduler=" << c.scheduler_name << " init=" << c.init_spec;
  if (c.zeta) out << " zeta=" << exact(*c.zeta);
  if (c.name == "tail") out << " rho=" << exact(c.rho);
  if (c.name == "zeta-c") out << " tolerance=" << exact(c.tolerance);
  out << " replicas=" << c.replicas << " budget=" << c.budget << " generator=" << kGeneratorId << '\n';
}

struct Output {
  std::string csv;
  json summary;
};

void emit(const Command& c, const Output& o) {
  if (!c.out.empty()) write_file(c.out, c.format == "json" ? o.summary.dump(2) + "\n" : o.csv);
  if (!c.summary.empty()) write_file(c.summary, o.summary.dump(2) + "\n");
}

SimParams sim_params(const Command& c) {
  SimParams p;
  p.radius = c.radius;
  p.lambda = c.lambda;
  p.init = c.init;
  p.seed = c.seed;
  p.scheduler = c.scheduler;
  p.budget = c.budget;
  p.replicas = c.replicas;
  p.verify_every = c.verify_every;
  return p;
}

std::string state_name(const Configuration& cfg, std::size_t i) {
  if (cfg.is_sleeping(i)) return "sleeping";
  if (cfg.is_empty(i)) return "empty";
  return "active:" + std::to_string(cfg.active_count(i));
}

int cmd_stabilize(const Command& c, std::ostream& out, std::ostream& err) {
  const Box box(c.radius);
  const Configuration eta0 = sample_initial(c.init, box, initial_condition_seed(c.seed));
  if (eta0.total_particles() > box.size()) {
    err << "warning: " << eta0.total_particles() << " particles exceed the box size " << box.size() << '\n';
  }
  StabilizationResult res;
  try {
    res = stabilize(box, eta0, {c.seed, c.lambda, c.scheduler, c.budget});
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const auto reports = verify_all(box, eta0, res, c.seed, SleepRate(c.lambda), CountSource::Engine);
  const bool ok = all_pass(reports);

  out << "particles=" << eta0.total_particles() << " S_total=" << res.sleeping_total()
      << " Phi_total=" << res.exit_total() << " M_total=" << res.odometer_total()
      << " instructions=" << res.total_instructions << " balance=" << (ok ? "PASS" : "FAIL") << '\n';

  Output o;
  if (c.fields) {
    CsvWriter w({"kind", "x", "y", "M", "S", "Phi", "final"});
    for (std::size_t i = 0; i < box.size(); ++i) {
      const Site s = box.site(i);
      w.row({"site", std::to_string(s.x), std::to_string(s.y), std::to_string(res.odometer[i]),
             std::to_string(res.sleep_field[i]), "", state_name(res.final_config, i)});
    }
    for (std::size_t b = 0; b < box.boundary_size(); ++b) {
      const Site s = box.boundary_sites()[b];
      w.row({"boundary", std::to_string(s.x), std::to_string(s.y), "", "", std::to_string(res.exit_measure[b]), ""});
    }
    o.csv = w.str();
  } else {
    CsvWriter w({"N", "lambda", "init", "seed", "scheduler", "particles", "S_total", "Phi_total", "M_total",
                 "instructions", "balance"});
    w.row({std::to_string(c.radius), exact(c.lambda), c.init_spec, std::to_string(c.seed), c.scheduler_name,
           std::to_string(eta0.total_particles()), std::to_string(res.sleeping_total()),
           std::to_string(res.exit_total()), std::to_string(res.odometer_total()),
           std::to_string(res.total_instructions), ok ? "PASS" : "FAIL"});
    o.csv = w.str();
  }
  o.summary = {{"params", params_json(c)},
               {"result",
                {{"particles", eta0.total_particles()},
                 {"S_total", res.sleeping_total()},
                 {"Phi_total", res.exit_total()},
                 {"M_total", res.odometer_total()},
                 {"instructions", res.total_instructions}}},
               {"balance", json::array()}};
  for (const auto& r : reports) o.summary["balance"].push_back(to_json(r));
  emit(c, o);
  return ok ? 0 : 1;
}

int cmd_abelian(const Command& c, std::ostream& out, std::ostream& err) {
  const Box box(c.radius);
  const Configuration eta0 = sample_initial(c.init, box, initial_condition_seed(c.seed));
  const auto policies = all_policies(c.seed);
  CsvWriter w({"policy", "S_total", "Phi_total", "M_total", "instructions"});
  json rows = json::array();
  // Per-policy totals for the data file; the comparison itself is abelian_check's.
  try {
    for (const auto& p : policies) {
      const auto r = stabilize(box, eta0, {c.seed, c.lambda, p, c.budget});
      const std::string name(policy_name(p));
      w.row({name, std::to_string(r.sleeping_total()), std::to_string(r.exit_total()),
             std::to_string(r.odometer_total()), std::to_string(r.total_instructions)});
      rows.push_back({{"policy", name},
                      {"S_total", r.sleeping_total()},
                      {"Phi_total", r.exit_total()},
                      {"M_total", r.odometer_total()},
                      {"instructions", r.total_instructions}});
    }
    const AbelianCheck check = abelian_check(box, eta0, {c.seed, c.lambda, policies.front(), c.budget}, policies);
    json summary{{"params", params_json(c)}, {"pass", check.pass}, {"policies", rows}};
    if (check.pass) {
      out << "PASS abelian invariance across fifo, lifo, random, cycle\n";
    } else {
      out << "FAIL " << policy_name(policies[*check.diverging_policy]) << " differs from "
          << policy_name(policies.front()) << " in " << check.field;
      if (check.site) out << " at (" << check.site->x << "," << check.site->y << ")";
      out << '\n';
      summary["divergence"] = {{"policy", std::string(policy_name(policies[*check.diverging_policy]))},
                               {"field", check.field}};
      if (check.site) summary["divergence"]["site"] = {check.site->x, check.site->y};
    }
    emit(c, {w.str(), summary});
    return check.pass ? 0 : 1;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_tail(const Command& c, std::ostream& out, std::ostream& err) {
  TailEstimate t;
  try {
    t = estimate_tail(sim_params(c), c.rho);
  } catch (const ReplicaFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const double threshold = c.rho * static_cast<double>(t.box_size);
  CsvWriter w({"replica", "seed", "particles", "S_total", "Phi_total", "M_total", "instructions", "hit"});
  for (const auto& o : t.outcomes) {
    w.row({std::to_string(o.replica), std::to_string(o.seed), std::to_string(o.particles),
           std::to_string(o.sleeping), std::to_string(o.exited), std::to_string(o.odometer_total),
           std::to_string(o.instructions), static_cast<double>(o.sleeping) >= threshold ? "1" : "0"});
  }
  const std::string chernoff = t.chernoff_log_bound ? short_num(*t.chernoff_log_bound) : "n/a (vacuous)";
  out << "p_hat=" << short_num(t.p_hat) << " hits=" << t.hits << "/" << t.replicas << " wilson95=["
      << short_num(t.wilson.lo) << ", " << short_num(t.wilson.hi) << "] chernoff_log_bound=" << chernoff << '\n';
  json summary{{"params", params_json(c)},
               {"box_size", t.box_size},
               {"p_hat", t.p_hat},
               {"hits", t.hits},
               {"replicas", t.replicas},
               {"wilson95", {t.wilson.lo, t.wilson.hi}}};
  summary["chernoff_log_bound"] = t.chernoff_log_bound ? json(*t.chernoff_log_bound) : json("n/a (vacuous)");
  emit(c, {w.str(), summary});
  return 0;
}

int cmd_curve(const Command& c, std::ostream& out, std::ostream& err) {
  std::vector<DensityCurvePoint> pts;
  try {
    pts = density_curve(c.lambdas, c.zetas, c.radius, c.replicas, c.seed, c.budget);
  } catch (const ReplicaFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  CsvWriter w({"lambda", "zeta", "N", "replicas", "mean_density", "std_error"});
  json rows = json::array();
  for (const auto& p : pts) {
    w.row({exact(p.lambda), exact(p.zeta), std::to_string(p.radius), std::to_string(p.replicas),
           exact(p.mean_density), exact(p.std_error)});
    rows.push_back({{"lambda", p.lambda},
                    {"zeta", p.zeta},
                    {"mean_density", p.mean_density},
                    {"std_error", p.std_error}});
    out << "lambda=" << short_num(p.lambda) << " zeta=" << short_num(p.zeta)
        << " density=" << short_num(p.mean_density) << " +- " << short_num(p.std_error) << '\n';
  }
  emit(c, {w.str(), {{"params", params_json(c)}, {"points", rows}}});
  return 0;
}

int cmd_zeta_c(const Command& c, std::ostream& out, std::ostream& err) {
  ZetaCEstimate est;
  try {
    est = estimate_zeta_c(c.lambda, c.radius, c.replicas, c.tolerance, c.seed, c.budget);
  } catch (const ReplicaFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  CsvWriter w({"label", "lambda", "zeta", "retained_fraction"});
  json evals = json::array();
  for (const auto& [z, f] : est.evaluations) {
    w.row({est.label, exact(c.lambda), exact(z), exact(f)});
    evals.push_back({{"zeta", z}, {"retained_fraction", f}});
  }
  json summary{{"params", params_json(c)}, {"label", est.label}, {"bracketed", est.bracketed}, {"evaluations", evals}};
  if (est.bracketed) {
    summary["interval"] = {est.interval.lo, est.interval.hi};
    out << est.label << " zeta_c in [" << short_num(est.interval.lo) << ", " << short_num(est.interval.hi) << "]\n";
  } else {
    summary["note"] = est.note;
    out << est.label << " NoBracket: " << est.note << '\n';
  }
  emit(c, {w.str(), summary});
  return est.bracketed ? 0 : 1;
}

int cmd_oracle(const Command& c, std::ostream& out, std::ostream& err) {
  SimParams p = sim_params(c);
  p.init = InitialCondition::single();
  std::vector<ReplicaOutcome> outcomes;
  try {
    outcomes = run_replicas(p);
  } catch (const ReplicaFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  std::size_t slept = 0;
  for (const auto& o : outcomes) slept += o.sleeping;
  const double n = static_cast<double>(outcomes.size());
  const double oracle = single_particle_oracle(c.lambda, c.radius);
  const double empirical = static_cast<double>(slept) / n;
  const double sigma = std::sqrt(oracle * (1.0 - oracle) / n);
  const bool agree = std::abs(empirical - oracle) <= 3.0 * sigma;
  out << "oracle=" << exact(oracle) << " empirical=" << exact(empirical) << " sigma=" << short_num(sigma) << ' '
      << (agree ? "PASS" : "FAIL") << '\n';
  CsvWriter w({"N", "lambda", "replicas", "oracle", "empirical", "sigma", "agree"});
  w.row({std::to_string(c.radius), exact(c.lambda), std::to_string(outcomes.size()), exact(oracle), exact(empirical),
         exact(sigma), agree ? "1" : "0"});
  emit(c, {w.str(),
           {{"params", params_json(c)},
            {"oracle", oracle},
            {"empirical", empirical},
            {"sigma", sigma},
            {"agree", agree}}});
  return agree ? 0 : 1;
}

}  // namespace

Command parse(const std::vector<std::string>& argv) {
  CLI::App app{"Activated random walk stabilization and Monte Carlo experiments", "arw"};
  app.require_subcommand(1);

  Command cmd;
  std::optional<std::uint64_t> seed;
  std::optional<double> zeta;
  std::vector<CLI::App*> subs;

  auto non_negative = CLI::Validator(
      [](std::string& v) -> std::string {
        try {
          if (std::stod(v) < 0) return "must be >= 0";
        } catch (...) {
          return "not a number";
        }
        return {};
      },
      ">=0");

  const std::map<std::string, std::string> descriptions = {
      {"stabilize", "stabilize one or more replicas and check the balance identities"},
      {"abelian-check", "stabilize under every scheduler and compare (M, S, Phi)"},
      {"tail", "estimate P(S(B_N) >= rho |B_N|) with Wilson and Chernoff bounds"},
      {"curve", "mean sleeping density over a (lambda, zeta) grid, Poisson starts"},
      {"zeta-c", "HEURISTIC finite-box bisection for the critical density"},
      {"oracle-check", "compare one-particle sleep frequency with the exact solution"},
  };
  for (const auto& name : kCommands) {
    CLI::App* s = app.add_subcommand(name, descriptions.at(name));
    subs.push_back(s);
    s->add_option("-N", cmd.radius, "box radius")->check(CLI::NonNegativeNumber);
    s->add_option("--lambda", cmd.lambda, "sleep rate")->check(non_negative);
    s->add_option("--seed", seed, "master seed (required)")->required();
    s->add_option("--scheduler", cmd.scheduler_name, "fifo|lifo|random|cycle")
        ->check(CLI::IsMember({"fifo", "lifo", "random", "cycle"}));
    s->add_option("--init", cmd.init_spec, "full|bernoulli|poisson|single|file=PATH");
    s->add_option("--zeta", zeta, "initial density")->check(non_negative);
    s->add_option("--rho", cmd.rho, "tail density threshold")->check(CLI::PositiveNumber);
    s->add_option("--replicas", cmd.replicas, "replica count")->check(CLI::PositiveNumber);
    s->add_option("--budget", cmd.budget, "instruction cap per run")->check(CLI::PositiveNumber);
    s->add_option("--out", cmd.out, "data file");
    s->add_option("--format", cmd.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--summary", cmd.summary, "JSON summary file");
    s->add_flag("--fields", cmd.fields, "emit per-site fields (stabilize, csv)");
    s->add_option("--lambdas", cmd.lambdas, "comma-separated sleep rates (curve)")->delimiter(',')->check(non_negative);
    s->add_option("--zetas", cmd.zetas, "comma-separated densities (curve)")->delimiter(',')->check(non_negative);
    s->add_option("--tolerance", cmd.tolerance, "bracket width (zeta-c)")->check(CLI::PositiveNumber);
    s->add_option("--verify-every", cmd.verify_every, "check identities on every k-th replica");
  }

  std::vector<const char*> raw;
  raw.reserve(argv.size());
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (CLI::App* s : subs) {
    if (s->parsed()) cmd.name = s->get_name();
  }
  cmd.seed = *seed;
  cmd.zeta = zeta;
  cmd.scheduler = *parse_policy(cmd.scheduler_name, cmd.seed);
  cmd.init = parse_init(cmd.init_spec, zeta);
  if (cmd.fields && cmd.format != "csv") throw UsageError("--fields requires --format csv");
  if (cmd.name == "curve" && (cmd.lambdas.empty() || cmd.zetas.empty())) {
    throw UsageError("curve requires --lambdas and --zetas");
  }
  return cmd;
}

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
  echo_params(cmd, out);
  if (cmd.lambda >= 1.0) err << "warning: lambda >= 1 is outside the small-sleep-rate regime\n";
  try {
    if (cmd.name == "stabilize") return cmd_stabilize(cmd, out, err);
    if (cmd.name == "abelian-check") return cmd_abelian(cmd, out, err);
    if (cmd.name == "tail") return cmd_tail(cmd, out, err);
    if (cmd.name == "curve") return cmd_curve(cmd, out, err);
    if (cmd.name == "zeta-c") return cmd_zeta_c(cmd, out, err);
    if (cmd.name == "oracle-check") return cmd_oracle(cmd, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: unknown command " << cmd.name << '\n';
  return 2;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse(argv);
  } catch (const HelpRequested& e) {
    out << e.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  return execute(cmd, out, err);
}

}  // namespace arw::cli
