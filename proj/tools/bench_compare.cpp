// Timing comparison of the OpenMP kernels against their serial references:
// Monte Carlo walkers and BIE collocation assembly.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nep/montecarlo.hpp"
#include "nep/neumann.hpp"
#include "nep/robin_bie.hpp"

using h_clock = std::chrono::high_resolution_clock;

static double seconds_since(h_clock::time_point t0) {
    return std::chrono::duration<double>(h_clock::now() - t0).count();
}

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif

    const nep::ProblemSpec spec{nep::HeadDomain::unit_disk(),
                                {{0.0, 0.05, 2.0}, {M_PI / 2.0, 0.05, 2.0}}};

    {
        const nep::mc::CompositeGeometry geom = nep::mc::CompositeGeometry::build(spec);
        nep::mc::McParams p;
        p.dt = 1e-4;
        p.n_walkers = 1000;
        p.seed = 7;
        auto t0 = h_clock::now();
        const auto serial = nep::mc::simulate_serial(geom, {0.0, 0.0}, p);
        const double ts = seconds_since(t0);
        t0 = h_clock::now();
        const auto parallel = nep::mc::simulate(geom, {0.0, 0.0}, p);
        const double tp = seconds_since(t0);
        std::printf("monte carlo  (%d walkers): serial %.3fs  parallel %.3fs  speedup %.2fx\n",
                    p.n_walkers, ts, tp, ts / tp);
        std::printf("  means: serial %.6f  parallel %.6f  (identical: %s)\n", serial.mean_fpt,
                    parallel.mean_fpt, serial.mean_fpt == parallel.mean_fpt ? "yes" : "NO");
    }

    {
        // general curve so the assembly includes the Nystrom kernel work
        const auto ellipse = nep::HeadDomain::from_curve(
            [](double t) { return nep::Vec2{std::cos(t), 0.5 * std::sin(t)}; },
            [](double t) { return nep::Vec2{-std::sin(t), 0.5 * std::cos(t)}; },
            [](double t) { return nep::Vec2{-std::cos(t), -0.5 * std::sin(t)}; });
        const double per = ellipse.perimeter();
        const nep::ProblemSpec espec{ellipse, {{0.0, 0.01, 1.0}, {0.45 * per, 0.01, 1.0}}};
        const nep::NeumannKernel kernel = nep::NeumannKernel::numerical(ellipse, 256);
        auto t0 = h_clock::now();
        const auto a_serial = nep::bie::assemble_collocation(espec, kernel, 32, false);
        const double ts = seconds_since(t0);
        t0 = h_clock::now();
        const auto a_par = nep::bie::assemble_collocation(espec, kernel, 32, true);
        const double tp = seconds_since(t0);
        double max_diff = 0.0;
        for (size_t i = 0; i < a_serial.A.size(); ++i)
            max_diff = std::max(max_diff, std::abs(a_serial.A[i] - a_par.A[i]));
        std::printf("bie assembly (dim %d):     serial %.3fs  parallel %.3fs  speedup %.2fx\n",
                    a_serial.dim, ts, tp, ts / tp);
        std::printf("  max |A_serial - A_parallel| = %.3g\n", max_diff);
    }
    return 0;
}
