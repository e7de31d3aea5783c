/**
 * @file waveform.hpp
 * @brief Transmit-side construction: symbol grids, OFDM frame synthesis,
 *        multicarrier phase-coded pulses, PAPR and ambiguity analysis.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac::waveform {

enum class Constellation { qpsk, qam16, unit_random };

/// i.i.d. unit-average-energy symbols, deterministic for a given seed.
CMat build_symbol_grid(int n_sub, int n_sym, Constellation kind, std::uint64_t seed);

/// Flat power grid summing to the frame budget.
RMat uniform_power_grid(const FrameConfig& cfg);

/// Complex baseband samples at a uniform rate.
struct SampleStream {
    double fs = 0;        ///< Hz
    double t0 = 0;        ///< s, time of first sample
    std::vector<cplx> x;  ///< samples
};

/// Synthesizes the frame: per symbol, an oversampled multicarrier body with a
/// cyclic prefix. The stream is scaled so the frame carries total energy
/// equal to the grid budget, i.e. mean power = total_power / (M * Tsym).
SampleStream ofdm_modulate(const CMat& x, const RMat& p, const FrameConfig& cfg,
                           int oversample = 1);

/// Peak-to-average power ratio (linear).
double papr(const SampleStream& s);

/// Multicarrier phase-coded pulse: N carriers at 1/Tc spacing centered on
/// baseband, each carrying L phase-coded chips of duration Tc.
struct McpcConfig {
    int n_carriers = 0;
    int n_chips = 0;            ///< L, chips per carrier
    double chip_duration = 0;   ///< Tc, s
    CMat codes;                 ///< N x L unit-modulus chips
    std::vector<cplx> weights;  ///< per-carrier weights, size N
    double cp_duration = 0;     ///< optional cyclic prefix, s (0 = off)

    void validate() const;
};

/// P4 polyphase sequence of length l.
std::vector<cplx> p4_code(int l);

/// Zadoff-Chu sequence of length l with the given root (coprime with l).
std::vector<cplx> zadoff_chu_code(int l, int root);

enum class CodeFamily { p4, zadoff_chu };

/// Standard construction: carrier n carries the base sequence cyclically
/// shifted by n mod L, unit weights.
McpcConfig mcpc_shifted_family(int n_carriers, int n_chips, CodeFamily family,
                               double chip_duration, int root = 1);

/// g(t) = sum_n w_n sum_l c_{n,l} s(t - l Tc) exp(j 2 pi (n - (N-1)/2) t / Tc)
/// sampled on [0, L Tc) at rate fs, s = unit rect of width Tc. If
/// cp_duration > 0 the tail is cyclically prepended and t0 = -cp_duration.
SampleStream mcpc_envelope(const McpcConfig& cfg, double fs);

/// Conventional OFDM pulse of duration Tc: the degenerate single-chip
/// envelope (L = 1, all chips = 1) with the given carrier weights.
SampleStream ofdm_pulse(int n_carriers, const std::vector<cplx>& weights,
                        double chip_duration, double fs);

/// |AF(tau, nu)| over the given grids, normalized to 1 at (0, 0). Delays are
/// rounded to the sample grid; delays beyond the stream support are an error.
RMat ambiguity_function(const SampleStream& s, const std::vector<double>& delays,
                        const std::vector<double>& dopplers);

/// Full width of the mainlobe around the peak at which the squared magnitude
/// falls below half the peak, measured on a 1-D cut sampled at `step`.
double mainlobe_width_3db(const std::vector<double>& cut, double step);

} // namespace isac::waveform
