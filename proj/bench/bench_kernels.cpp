// Serial reference vs OpenMP kernels on the default simulated corpus.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "locrank/evalstats.hpp"
#include "locrank/simulator.hpp"
#include "locrank/trainer.hpp"

using namespace locrank;

template <typename Fn>
double time_ms(int reps, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  SimConfig sim;
  const Dataset ds = simulate(sim);
  TrainConfig cfg;
  const LinearModel model = logging_model(sim);
  const std::vector<bool> mask;

  std::printf("queries %zu, items %zu, D %zu, threads %d, reps %d\n", ds.queries.size(),
              ds.item_count(), ds.feature_dim, omp_get_max_threads(), reps);

  EpochGradient gs, gp;
  const double t_gs = time_ms(reps, [&] { gs = epoch_gradient_serial(ds, model, cfg, 1, mask); });
  const double t_gp = time_ms(reps, [&] { gp = epoch_gradient_parallel(ds, model, cfg, 1, mask); });
  std::printf("%-18s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  identical %s\n",
              "epoch_gradient", t_gs, t_gp, t_gs / t_gp, gs == gp ? "yes" : "NO");

  EvalReport rs, rp;
  const auto ks = default_ks();
  const double t_es = time_ms(reps, [&] { rs = evaluate(ds, model, ks, Execution::serial); });
  const double t_ep = time_ms(reps, [&] { rp = evaluate(ds, model, ks, Execution::parallel); });
  std::printf("%-18s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  identical %s\n",
              "evaluate", t_es, t_ep, t_es / t_ep, rs == rp ? "yes" : "NO");
  return 0;
}
