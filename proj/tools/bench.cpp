// Times the replication loop serially and with OpenMP on the same config and
// checks that both paths aggregate to identical metrics.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pacmarl/harness.hpp"

using namespace pacmarl;
using clock_type = std::chrono::steady_clock;

namespace {

double run_timed(const ExperimentConfig& cfg, bool parallel,
                 std::vector<EpisodeMetrics>& out) {
    const auto start = clock_type::now();
    out = run_experiment(cfg, parallel);
    const std::chrono::duration<double, std::milli> elapsed = clock_type::now() - start;
    return elapsed.count();
}

} // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    cfg.scheme = Scheme::optimal;
    cfg.sigma_l2 = 0.1;
    cfg.sigma_a2 = 0.4;
    cfg.replications = argc > 1 ? std::atoi(argv[1]) : 64;

#ifdef _OPENMP
    std::printf("replications: %d, threads: %d\n", cfg.replications, omp_get_max_threads());
#else
    std::printf("replications: %d, OpenMP disabled at build time\n", cfg.replications);
#endif

    std::vector<EpisodeMetrics> serial, parallel;
    const double t_serial = run_timed(cfg, false, serial);
    const double t_parallel = run_timed(cfg, true, parallel);

    bool identical = serial.size() == parallel.size();
    for (size_t e = 0; identical && e < serial.size(); ++e)
        identical = serial[e].mean_reward == parallel[e].mean_reward &&
                    serial[e].std_reward == parallel[e].std_reward &&
                    serial[e].oracle_mean == parallel[e].oracle_mean;

    std::printf("serial   : %8.1f ms\n", t_serial);
    std::printf("openmp   : %8.1f ms\n", t_parallel);
    std::printf("speedup  : %8.2fx\n", t_serial / t_parallel);
    std::printf("outputs  : %s\n", identical ? "identical" : "DIFFER");
    return identical ? 0 : 1;
}
