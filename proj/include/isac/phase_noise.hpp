/**
 * @file phase_noise.hpp
 * @brief Oscillator phase noise: free-running (Wiener) and loop-locked
 *        (first-order PLL) models, the self-referenced phase grid seen by a
 *        shared-oscillator receiver, and its analytic covariance.
 *
 * Grid sampling convention: with fs = N * scs, the cell (l, m) is sampled at
 * lattice index m * (n_cp + N) + n_cp + l where n_cp = round(Tcp * fs). Time
 * differences between cells then depend only on index lags, which keeps the
 * covariance exactly Toeplitz-block-Toeplitz.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac::pn {

struct PnModel {
    enum class Kind { free_running, pll };
    Kind kind = Kind::free_running;
    double bw3db = 0;    ///< Hz, oscillator 3 dB linewidth parameter
    double loop_bw = 0;  ///< Hz, PLL loop corner (pll only)

    void validate() const;
};

/// One oscillator phase path sampled at rate fs. Free-running: Wiener with
/// per-sample increment variance 4 pi bw3db / fs. PLL: the same innovations
/// through a single-pole loop, i.e. AR(1) with pole exp(-2 pi loop_bw / fs),
/// stationary start.
std::vector<double> sample_pn_path(const PnModel& model, double fs, std::size_t n,
                                   std::uint64_t seed);

/// Self-referenced phase grid for one echo delay: xi(l, m) =
/// phi(t_lm) - phi(t_lm - tau), w = exp(j xi).
struct PnGrid {
    RMat xi;
    CMat w;
};

/// Grids for several delays drawn from a single oscillator realization.
/// Free-running paths are evaluated exactly at the (off-lattice) shifted
/// times; PLL delays are rounded to the sample lattice.
std::vector<PnGrid> self_referenced_pn_multi(const PnModel& model,
                                             const std::vector<double>& taus,
                                             const FrameConfig& cfg, std::uint64_t seed);

PnGrid self_referenced_pn(const PnModel& model, double tau, const FrameConfig& cfg,
                          std::uint64_t seed);

/// Covariance of xi between two grid cells at lattice-index lag k.
double pn_cov_at_lag(const PnModel& model, double tau, const FrameConfig& cfg, long k);

/// Full NM x NM covariance of vec(xi) (column-major, index = m * N + l).
/// Toeplitz-block-Toeplitz by construction.
RMat analytic_pn_covariance(const PnModel& model, double tau, const FrameConfig& cfg);

/// Lattice helpers shared with the receivers.
long cp_samples(const FrameConfig& cfg);
long symbol_samples(const FrameConfig& cfg);
inline long cell_index(const FrameConfig& cfg, int l, int m)
{
    return m * symbol_samples(cfg) + cp_samples(cfg) + l;
}

} // namespace isac::pn
