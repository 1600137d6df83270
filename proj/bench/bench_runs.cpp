#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "dcm/degree_law.hpp"
#include "dcm/harness.hpp"

using namespace dcm;

namespace {

double seconds_of(const ExperimentConfig& cfg, Execution exec, std::vector<RunRecord>& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = run_experiment(cfg, exec);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timing of run_experiment on Poisson(1,1) configuration graphs"};
  std::vector<std::size_t> n_list{10'000, 30'000};
  std::size_t runs = 16;
  std::uint64_t seed = 1;
  app.add_option("--n", n_list, "graph sizes");
  app.add_option("--runs", runs, "runs per size");
  app.add_option("--seed", seed, "base seed");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads=%d\n", omp_get_max_threads());
  std::printf("%10s %6s %10s %10s %8s %6s\n", "n", "runs", "serial_s", "parallel_s", "speedup", "same");
  bool all_same = true;
  for (auto n : n_list) {
    ExperimentConfig cfg;
    cfg.law_spec = JointDegreeLaw::poisson_product(1, 1).to_json();
    cfg.n_list = {n};
    cfg.runs_per_n = runs;
    cfg.seed = seed;
    std::vector<RunRecord> serial, parallel;
    const double ts = seconds_of(cfg, Execution::serial, serial);
    const double tp = seconds_of(cfg, Execution::parallel, parallel);
    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) same = serial[i].same_result(parallel[i]);
    all_same = all_same && same;
    std::printf("%10zu %6zu %10.3f %10.3f %8.2f %6s\n", n, runs, ts, tp, ts / tp, same ? "yes" : "no");
  }
  return all_same ? 0 : 1;
}
