// Benchmark: OpenMP-parallel weighted reductions and slab advancement
// against the serial reference paths.

#include <chrono>
#include <cstdio>
#include <vector>

#include "bbm/measures.hpp"
#include "bbm/simulator.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class F>
double time_best_of(int reps, F&& f, double* sink) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_s();
        *sink += f();
        best = std::min(best, now_s() - t0);
    }
    return best;
}

}  // namespace

int main() {
    const double horizon = 13.0;
    bbm::ModelParams params(1, 1.0, bbm::OffspringLaw::binary(), {0.5});
    const std::vector<double> schedule{horizon};

    std::printf("simulating one trajectory to t=%.0f ...\n", horizon);
    const double t0 = now_s();
    const bbm::Trajectory traj = bbm::simulate(params, schedule, 20240901, 1);
    const double serial_sim = now_s() - t0;
#ifdef _OPENMP
    const int max_workers = omp_get_max_threads();
#else
    const int max_workers = 1;
#endif
    const double t1 = now_s();
    const bbm::Trajectory traj_p =
        bbm::simulate(params, schedule, 20240901, max_workers);
    const double parallel_sim = now_s() - t1;
    const bool identical = traj.snapshots[0].ids == traj_p.snapshots[0].ids &&
                           traj.snapshots[0].coords == traj_p.snapshots[0].coords;
    std::printf("simulate: serial %.3fs, %d workers %.3fs (%.2fx), identical=%s\n",
                serial_sim, max_workers, parallel_sim, serial_sim / parallel_sim,
                identical ? "yes" : "NO");

    const bbm::Snapshot& snap = traj.snapshots[0];
    std::printf("population at t=%.0f: %zu particles\n", horizon, snap.size());

    double sink = 0.0;
    const std::vector<double> b{0.0};
    const bbm::MultiIndex k2({2});

    const double cdf_serial = time_best_of(5, [&] {
        return bbm::measures::serial_additive_cdf(snap, params, b,
                                                  bbm::Scaling::scaled);
    }, &sink);
    const double cdf_parallel = time_best_of(5, [&] {
        return bbm::measures::additive_cdf(snap, params, b, bbm::Scaling::scaled);
    }, &sink);
    std::printf("additive_cdf:       serial %.4fs, parallel %.4fs (%.2fx)\n",
                cdf_serial, cdf_parallel, cdf_serial / cdf_parallel);

    const double mart_serial = time_best_of(5, [&] {
        return bbm::measures::serial_hermite_martingale(snap, params, k2);
    }, &sink);
    const double mart_parallel = time_best_of(5, [&] {
        return bbm::measures::hermite_martingale(snap, params, k2);
    }, &sink);
    std::printf("hermite_martingale: serial %.4fs, parallel %.4fs (%.2fx)\n",
                mart_serial, mart_parallel, mart_serial / mart_parallel);

    std::printf("(sink %.17g)\n", sink);
    return identical ? 0 : 1;
}
