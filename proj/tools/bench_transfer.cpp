// Serial-vs-parallel benchmark for the transfer-matrix oracle: times the same
// amplitude with Exec::serial and Exec::parallel and checks the two results
// bit for bit (the parallel path only distributes independent per-index
// writes, so any difference is a bug).  Not registered with ctest; run by
// hand when tuning.

#include "relgreen/potential.hpp"
#include "relgreen/transfer.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace relgreen;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    int repeats = 3;
    double dx = 0.01;
    if (argc > 1) repeats = std::atoi(argv[1]);
    if (argc > 2) dx = std::atof(argv[2]);

    ParticleConfig p;
    const Potential V = Potential::square_well(-0.3, -0.8, 0.9);
    const Complex E(0.25, 0.0);
    const double x_b = 0.7, x_a = -0.4;
    GridSpec grid;
    grid.dx = dx;
    SlicingSpec slicing;
    slicing.eps = 0.05;

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both runs are serial\n");
#endif
    std::printf("square well v0=-0.3 on [-0.8, 0.9], E=%.2f, dx=%g, eps=%g\n",
                E.real(), grid.dx, slicing.eps);

    Complex serial_value{}, parallel_value{};
    double serial_best = 1e300, parallel_best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        serial_value =
            transfer_matrix_amplitude(V, E, x_b, x_a, p, grid, slicing, Exec::serial);
        serial_best = std::min(serial_best, seconds_since(t0));

        t0 = std::chrono::steady_clock::now();
        parallel_value = transfer_matrix_amplitude(V, E, x_b, x_a, p, grid, slicing,
                                                   Exec::parallel);
        parallel_best = std::min(parallel_best, seconds_since(t0));
    }

    const bool bitwise =
        std::memcmp(&serial_value, &parallel_value, sizeof serial_value) == 0;
    std::printf("serial   : %.6f s   value = %.17g + %.17gi\n", serial_best,
                serial_value.real(), serial_value.imag());
    std::printf("parallel : %.6f s   value = %.17g + %.17gi\n", parallel_best,
                parallel_value.real(), parallel_value.imag());
    std::printf("speedup  : %.2fx\n", serial_best / parallel_best);
    std::printf("bitwise serial == parallel: %s\n", bitwise ? "yes" : "NO");
    return bitwise ? 0 : 1;
}
