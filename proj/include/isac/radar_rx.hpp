/**
 * @file radar_rx.hpp
 * @brief Sensing receiver: delay-Doppler matched processing, constant
 *        false-alarm detection, iterative echo extraction, angle estimation
 *        and synchronization-offset recovery.
 */
#pragma once

#include <limits>
#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac::rx {

/// Matched delay-Doppler surface. Rows are range bins of width
/// c / (2 pad_n N scs) starting at zero; columns are Doppler bins of width
/// lambda / (2 pad_m M Tsym) centered on zero velocity. Complex values are
/// scaled by 1/sqrt(N), so a unit-gain on-bin echo peaks at sum(P)/sqrt(N).
struct RangeDopplerMap {
    CMat z;
    FrameConfig cfg;
    int pad_n = 1;
    int pad_m = 1;
    double sum_power = 0;

    double range_bin() const
    {
        return kSpeedOfLight / (2.0 * pad_n * cfg.n_subcarriers * cfg.subcarrier_spacing);
    }
    double velocity_bin() const
    {
        return cfg.wavelength() / (2.0 * pad_m * cfg.n_symbols * cfg.symbol_duration());
    }
    double range_at(std::size_t r) const { return double(r) * range_bin(); }
    double velocity_at(std::size_t col) const
    {
        return (double(col) - double(z.cols / 2)) * velocity_bin();
    }
    /// Per-cell noise power for a given per-entry observation noise variance.
    double cell_noise_var(double noise_var) const
    {
        return noise_var * sum_power / cfg.n_subcarriers;
    }
};

RangeDopplerMap range_doppler_map(const CMat& y, const CMat& x, const RMat& p,
                                  const FrameConfig& cfg, int pad_n = 4, int pad_m = 4);

/// Max over Doppler per range bin, in dB relative to the global peak.
std::vector<double> range_profile_db(const RangeDopplerMap& map);

struct Detection {
    double range = 0;     ///< m
    double velocity = 0;  ///< m/s
    double angle = std::numeric_limits<double>::quiet_NaN();  ///< rad
    cplx amplitude{0, 0};
    double statistic = 0;
    int range_bin = 0;
    int doppler_bin = 0;  ///< column index in the map
};

struct DetectionReport {
    std::vector<Detection> detections;
    double threshold = 0;
    double pfa = 0;
};

/// Cell-level threshold test over noncoherently summed per-antenna maps.
/// The cell threshold is set so the max-over-cells false-alarm probability
/// equals pfa; neighboring hits merge into their strongest 3x3 peak.
DetectionReport glrt_detect(const std::vector<RangeDopplerMap>& maps, double noise_var,
                            double pfa);

struct ExtractOptions {
    int k_max = 5;
    double residual_threshold = 0.01;  ///< stop at this fraction of initial energy
    std::vector<double> cfo_grid{0.0};  ///< fast-time mixing candidates, Hz
    int pad_n = 4;
    int pad_m = 4;
};

/// Detect-strongest / reconstruct / subtract loop. For every candidate in
/// cfo_grid the residual is counter-rotated by the fast-time ramp before
/// mapping, and the globally best (candidate, delay, Doppler) triple wins.
/// Peak positions are refined by quadratic interpolation; amplitudes by
/// least squares against the reconstructed echo.
DetectionReport extract_targets(const CMat& y, const CMat& x, const RMat& p,
                                const FrameConfig& cfg, const ExtractOptions& opt);

/// extract_targets with the trivial candidate set {0}.
DetectionReport iterative_target_extraction(const CMat& y, const CMat& x, const RMat& p,
                                            const FrameConfig& cfg, int k_max = 5,
                                            double residual_threshold = 0.01);

/// Fills per-detection arrival angles from the per-antenna map values via a
/// zero-padded spatial DFT with quadratic peak interpolation.
void estimate_angles(DetectionReport& report, const std::vector<RangeDopplerMap>& maps,
                     const ArrayConfig& arrays, int pad = 256);

/// Single-cell detection probability Q1(sqrt(2 gamma), sqrt(-2 ln pfa)) for
/// integrated SNR gamma at per-cell false-alarm rate pfa.
double theoretical_pd(double gamma, double pfa);

struct SyncEstimate {
    double cfo = 0;      ///< Hz
    double delay = 0;    ///< s, includes any clock offset
    double doppler = 0;  ///< Hz, slow-time value of the dominant path
};

/// Receive-chain frequency-offset estimation from pilot cells: extract the
/// dominant echo on the pilot grid, reconstruct it without offset, and fit
/// the residual fast-time phase ramp by weighted least squares.
SyncEstimate estimate_cfo_clock(const CMat& y, const CMat& x, const RMat& p,
                                const FrameConfig& cfg, const Mat<unsigned char>& pilots);

} // namespace isac::rx
