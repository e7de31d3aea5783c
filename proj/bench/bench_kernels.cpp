// Timings for the OpenMP kernels against their serial brute-force twins.
// Run: bench_kernels [n_subcarriers n_symbols]
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#else
#include <chrono>
#endif

#include "isac/radar_rx.hpp"
#include "isac/reference.hpp"
#include "isac/rng.hpp"
#include "isac/waveform.hpp"

namespace {

double now()
{
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
#endif
}

template <typename F>
double time_best_of(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now();
        f();
        best = std::min(best, now() - t0);
    }
    return best;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace isac;

    int n = argc > 1 ? std::atoi(argv[1]) : 64;
    int m = argc > 2 ? std::atoi(argv[2]) : 16;
    if (n < 2 || m < 2) {
        std::fprintf(stderr, "usage: bench_kernels [n_subcarriers n_symbols]\n");
        return 1;
    }

    FrameConfig cfg;
    cfg.n_subcarriers = n;
    cfg.n_symbols = m;
    cfg.subcarrier_spacing = 120e3;
    cfg.cp_duration = 0.07 / cfg.subcarrier_spacing;
    cfg.carrier_freq = 28e9;
    cfg.total_power = double(n) * m;

    const CMat x = waveform::build_symbol_grid(n, m, waveform::Constellation::qpsk, 7);
    const RMat p = waveform::uniform_power_grid(cfg);
    CMat y(n, m);
    auto rng = make_rng(substream(7, 0xbe7c));
    fill_noise(y, 1.0, rng);

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("grid: %d x %d, map padding 2 x 2\n\n", n, m);

    const double t_fast =
        time_best_of(3, [&] { rx::range_doppler_map(y, x, p, cfg, 2, 2); });
    const double t_ref =
        time_best_of(3, [&] { reference::rd_map(y, x, p, cfg, 2, 2); });
    std::printf("%-28s %10.3f ms\n", "range_doppler_map (fft+omp)", 1e3 * t_fast);
    std::printf("%-28s %10.3f ms\n", "rd_map (serial reference)", 1e3 * t_ref);
    std::printf("%-28s %10.2fx\n\n", "speedup", t_ref / t_fast);

    const auto stream = waveform::ofdm_modulate(x, p, cfg, 2);
    std::vector<double> delays, dopplers{0.0};
    for (int i = -50; i <= 50; ++i)
        delays.push_back(double(i) / stream.fs);
    const double t_af_fast = time_best_of(
        3, [&] { waveform::ambiguity_function(stream, delays, dopplers); });
    const double t_af_ref = time_best_of(
        3, [&] { reference::ambiguity(stream.x, stream.fs, delays, dopplers); });
    std::printf("%-28s %10.3f ms\n", "ambiguity_function (omp)", 1e3 * t_af_fast);
    std::printf("%-28s %10.3f ms\n", "ambiguity (serial reference)", 1e3 * t_af_ref);
    std::printf("%-28s %10.2fx\n", "speedup", t_af_ref / t_af_fast);
    return 0;
}
