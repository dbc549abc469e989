// Compares the serial reference path of the experiment harness against the
// OpenMP path on the same workload and checks that the aggregated curves are
// byte-identical (the reduction is fixed-order pairwise, so scheduling must
// not leak into the results).

#include <chrono>
#include <cstdio>
#include <cstring>

#include "vomc/bench.hpp"

namespace {

double run_timed(vomc::ExperimentConfig cfg, bool parallel, vomc::ExperimentResult& out) {
  cfg.parallel = parallel;
  const auto t0 = std::chrono::steady_clock::now();
  out = vomc::run_experiment(cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  vomc::ExperimentConfig cfg;
  cfg.alphabet = 3;
  cfg.depth = 3;
  cfg.num_trees = argc > 1 ? std::atoi(argv[1]) : 64;
  cfg.seq_len = 5120;
  cfg.window = 512;
  cfg.predictors = {"ctw", "blend", "ppm", "genie"};
  cfg.seed = 7;

  vomc::ExperimentResult serial, parallel;
  const double t_serial = run_timed(cfg, false, serial);
  const double t_parallel = run_timed(cfg, true, parallel);

  bool identical = serial.curves.size() == parallel.curves.size();
  for (std::size_t c = 0; identical && c < serial.curves.size(); ++c) {
    identical = vomc::curve_csv(serial.curves[c]) == vomc::curve_csv(parallel.curves[c]);
  }

  std::printf("trees=%d window=%zu predictors=%zu\n", cfg.num_trees, cfg.window,
              cfg.predictors.size());
  std::printf("serial    %8.3f s\n", t_serial);
  std::printf("openmp    %8.3f s   speedup %.2fx\n", t_parallel, t_serial / t_parallel);
  std::printf("curves byte-identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
