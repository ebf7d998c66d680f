// Timings for the OpenMP measurement kernels against their serial
// references, plus a trial-level sweep comparison. Outputs must agree
// bit for bit; speedups depend on OMP_NUM_THREADS.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "treco/experiment.hpp"
#include "treco/kernels.hpp"

using namespace treco;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void bench_matvec(index_t m, index_t n, int reps) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Matrix a(m, n);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < m; ++i)
            a(i, j) = normal(rng);
    std::vector<double> x(static_cast<size_t>(n)), y_ser(static_cast<size_t>(m)),
        y_omp(static_cast<size_t>(m));
    std::vector<double> xt(static_cast<size_t>(m)), z_ser(static_cast<size_t>(n)),
        z_omp(static_cast<size_t>(n));
    for (double& v : x)
        v = normal(rng);
    for (double& v : xt)
        v = normal(rng);

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        kernels::matvec_serial(a, x.data(), y_ser.data());
    const double t_ser = seconds_since(t0);

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        kernels::matvec(a, x.data(), y_omp.data());
    const double t_omp = seconds_since(t0);

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        kernels::matvec_transpose_serial(a, xt.data(), z_ser.data());
    const double tt_ser = seconds_since(t0);

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        kernels::matvec_transpose(a, xt.data(), z_omp.data());
    const double tt_omp = seconds_since(t0);

    bool identical = y_ser == y_omp && z_ser == z_omp;
    std::printf("matvec      %5lld x %-6lld serial %8.3f ms  omp %8.3f ms  speedup %.2fx\n",
                static_cast<long long>(m), static_cast<long long>(n), 1e3 * t_ser / reps,
                1e3 * t_omp / reps, t_ser / t_omp);
    std::printf("matvec^T    %5lld x %-6lld serial %8.3f ms  omp %8.3f ms  speedup %.2fx\n",
                static_cast<long long>(m), static_cast<long long>(n), 1e3 * tt_ser / reps,
                1e3 * tt_omp / reps, tt_ser / tt_omp);
    std::printf("outputs bit-identical: %s\n", identical ? "yes" : "NO");
}

void bench_sweep() {
    ExperimentSpec spec;
    spec.shape = Shape({6, 6, 6});
    spec.rank = RankTuple(Format::tucker, {1, 1, 1});
    spec.grid = {30.0};
    spec.trials = 16;
    spec.max_iter = 500;
    spec.base_seed = 11;

    omp_set_num_threads(1);
    auto t0 = Clock::now();
    SweepResult serial = run_sweep(spec);
    const double t_ser = seconds_since(t0);

    omp_set_num_threads(omp_get_num_procs());
    t0 = Clock::now();
    SweepResult parallel = run_sweep(spec);
    const double t_par = seconds_since(t0);

    bool same = serial.rows.size() == parallel.rows.size();
    for (size_t i = 0; same && i < serial.rows.size(); ++i)
        same = serial.rows[i].successes == parallel.rows[i].successes &&
               serial.rows[i].mean_iters_success == parallel.rows[i].mean_iters_success;
    std::printf("sweep (16 trials)        serial %8.3f ms  omp %8.3f ms  speedup %.2fx\n",
                1e3 * t_ser, 1e3 * t_par, t_ser / t_par);
    std::printf("aggregates identical: %s\n", same ? "yes" : "NO");
}

} // namespace

int main() {
    std::printf("threads available: %d\n\n", omp_get_num_procs());
    bench_matvec(200, 1000, 200);
    std::printf("\n");
    bench_matvec(600, 9000, 40);
    std::printf("\n");
    bench_sweep();
    return 0;
}
