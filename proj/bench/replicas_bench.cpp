// Serial reference kernel vs OpenMP replica kernel on the same workload.
//
//   arw_bench [N] [lambda] [replicas]

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "arw/experiments.hpp"

int main(int argc, char** argv) {
  namespace chrono = std::chrono;
  arw::SimParams p;
  p.radius = argc > 1 ? std::atoi(argv[1]) : 24;
  p.lambda = argc > 2 ? std::atof(argv[2]) : 0.2;
  p.replicas = argc > 3 ? static_cast<std::size_t>(std::atol(argv[3])) : 64;
  p.init = arw::InitialCondition::full();
  p.seed = 2024;

  auto time = [&](auto kernel) {
    const auto t0 = chrono::steady_clock::now();
    auto out = kernel(p);
    const auto t1 = chrono::steady_clock::now();
    return std::pair{std::move(out), chrono::duration<double>(t1 - t0).count()};
  };

  const auto [serial, ts] = time(arw::run_replicas_serial);
  const auto [parallel, tp] = time(arw::run_replicas_parallel);

  std::uint64_t instructions = 0;
  for (const auto& o : serial) instructions += o.instructions;

  std::cout << "N=" << p.radius << " lambda=" << p.lambda << " replicas=" << p.replicas
            << " threads=" << omp_get_max_threads() << '\n'
            << "serial   " << ts << " s  (" << ts * 1e9 / static_cast<double>(instructions) << " ns/instruction)\n"
            << "parallel " << tp << " s  speedup " << ts / tp << '\n'
            << "outcomes " << (serial == parallel ? "identical" : "DIFFER") << '\n';
  return serial == parallel ? 0 : 1;
}
