// Throughput comparison between the serial and the OpenMP critic-update
// paths on a synthetic replay buffer. The two paths produce bitwise
// identical parameters; this only measures speed.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "pave/regularizers.hpp"
#include "pave/rng.hpp"
#include "pave/td3.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pave;

namespace {

double run_updates(bool parallel, int batch, const std::vector<int>& hidden, int n_updates,
                   bool with_regularizers) {
  TD3Config cfg;
  cfg.hidden = hidden;
  cfg.batch_size = batch;
  cfg.buffer_capacity = 4096;
  cfg.parallel_update = parallel;
  TD3Agent agent(3, 1, 2.0, cfg, 42);
  if (with_regularizers) {
    PaveHyperParams hp;
    agent.set_aux_provider(make_pave_provider(hp));
  }

  Rng rng(7);
  std::vector<double> s(3), a(1), sn(3);
  for (int i = 0; i < 2048; ++i) {
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    for (double& x : a) x = rng.uniform(-2.0, 2.0);
    for (double& x : sn) x = rng.uniform(-1.0, 1.0);
    agent.observe(s, a, rng.uniform(-17.0, 0.0), sn, (i % 200) == 199);
  }

  for (int i = 0; i < 3; ++i) agent.update();  // warm caches
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < n_updates; ++i) agent.update();
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return double(n_updates) / secs;
}

}  // namespace

int main(int argc, char** argv) {
  int batch = 128;
  std::vector<int> hidden = {64, 64};
  int n_updates = 50;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--batch" && i + 1 < argc) batch = std::atoi(argv[++i]);
    else if (arg == "--updates" && i + 1 < argc) n_updates = std::atoi(argv[++i]);
    else if (arg == "--hidden" && i + 1 < argc) {
      hidden.clear();
      std::string v = argv[++i];
      size_t pos = 0;
      while (pos < v.size()) {
        size_t comma = v.find(',', pos);
        if (comma == std::string::npos) comma = v.size();
        hidden.push_back(std::atoi(v.substr(pos, comma - pos).c_str()));
        pos = comma + 1;
      }
    } else {
      std::fprintf(stderr, "usage: bench_update [--batch N] [--hidden h1,h2] [--updates N]\n");
      return 1;
    }
  }

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled\n");
#endif
  std::printf("batch %d, hidden", batch);
  for (int h : hidden) std::printf(" %d", h);
  std::printf(", %d timed updates per mode\n", n_updates);

  for (bool with_reg : {false, true}) {
    double serial = run_updates(false, batch, hidden, n_updates, with_reg);
    double parallel = run_updates(true, batch, hidden, n_updates, with_reg);
    std::printf("%-18s serial %8.2f upd/s   parallel %8.2f upd/s   speedup %.2fx\n",
                with_reg ? "with regularizers" : "td only", serial, parallel, parallel / serial);
  }
  return 0;
}
