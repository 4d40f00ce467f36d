// Command-line front end: `arw <command> [flags]`.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arw/engine.hpp"
#include "arw/experiments.hpp"
#include "arw/scheduler.hpp"

namespace arw::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HelpRequested : public UsageError {
 public:
  using UsageError::UsageError;
};

struct Command {
  std::string name;  // stabilize | abelian-check | tail | curve | zeta-c | oracle-check
  int radius = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string scheduler_name = "fifo";
  SchedulerPolicy scheduler = SchedulerPolicy::fifo();
  std::string init_spec = "full";
  InitialCondition init = InitialCondition::full();
  std::optional<double> zeta;
  double rho = 0.9;
  std::size_t replicas = 1;
  std::uint64_t budget = kDefaultBudget;
  std::string out;
  std::string format = "csv";
  std::string summary;
  bool fields = false;
  std::vector<double> lambdas;
  std::vector<double> zetas;
  double tolerance = 0.02;
  std::size_t verify_every = 0;
};

/// Throws UsageError naming the offending flag. `argv[0]` is the program name.
Command parse(const std::vector<std::string>& argv);

/// Exit codes: 0 success, 1 runtime failure (budget exceeded, no bracket, failed check).
int execute(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse + execute; usage errors print to `err` and return 2.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace arw::cli
