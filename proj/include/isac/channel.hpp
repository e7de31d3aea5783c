/**
 * @file channel.hpp
 * @brief Scene description and grid-domain observation synthesis for the
 *        sensing and communication receivers, plus hardware channel models
 *        (self-interference, array impairments, PA memory polynomial).
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/phase_noise.hpp"
#include "isac/types.hpp"
#include "isac/waveform.hpp"

namespace isac::channel {

enum class SensingMode { monostatic, bistatic };

enum class ImpairmentMode { none, ici_exact, phase_noise, both };

/// Propagation path to the communication receiver.
struct CommPath {
    double delay = 0;
    double doppler = 0;
    double aod = 0;  ///< departure at the ISAC transmitter
    double aoa = 0;  ///< arrival at the comm receiver
    cplx gain{0, 0};
};

struct Scenario {
    FrameConfig frame;
    ArrayConfig arrays;
    SensingMode mode = SensingMode::monostatic;
    std::vector<Target> targets;
    std::vector<CommPath> comm_paths;
    SyncOffsets sync;
    double noise_radar = 1.0;  ///< per-entry variance at the radar receiver
    double noise_comm = 1.0;   ///< per-entry variance at the comm receiver
    std::uint64_t seed = 0;
    ImpairmentMode impairment = ImpairmentMode::none;
    pn::PnModel pn_model;
    bool allow_delay_beyond_cp = false;  ///< permit aliased delays (no ISI model)
    bool quasi_static_comm = true;       ///< freeze comm Doppler over the frame
    CMat tx_beams;                       ///< Nt x M, empty = all ones
    CMat comm_rx_beams;                  ///< Nc x M, empty = all ones

    void validate() const;
};

/// Radar observation, one fast-time x slow-time grid per receive element.
struct RadarFrame {
    std::vector<CMat> y;
    FrameConfig cfg;
    std::vector<std::string> impairments;  ///< applied-impairment record
    std::uint64_t seed = 0;
};

/// Grid-domain sensing observation for the configured scene. Per-target
/// impairment operators: exact intercarrier Doppler mixing (left diagonal
/// phase ramp) and/or self-referenced oscillator phase noise (Hadamard).
/// All targets share one oscillator realization.
RadarFrame simulate_radar_frame(const Scenario& sc, const CMat& x, const RMat& p);

struct CommFrame {
    CMat y;  ///< N x M observation after receive combining
    CMat h;  ///< N x M per-subcarrier channel gains
};

/// Comm-link observation; quasi-static mode freezes path Doppler.
CommFrame simulate_comm_frame(const Scenario& sc, const CMat& x, const RMat& p);

/// Rank-one self-interference coupling with Frobenius norm 10^(db/20) and a
/// seeded phase; -inf dB yields the zero matrix.
CMat build_si_channel(const ArrayConfig& arrays, double coupling_db, std::uint64_t seed,
                      double aod = 0.0, double aoa = 0.0);

/// Memory-polynomial PA: y[i] = sum_{p odd} sum_m a_{p,m} x[i-m] |x[i-m]|^(p-1).
struct MpPaModel {
    int max_order = 1;  ///< odd
    int memory = 0;
    CMat coeffs;        ///< ((max_order+1)/2) x (memory+1), row q holds order 2q+1

    void validate() const;
};

waveform::SampleStream apply_pa(const waveform::SampleStream& s, const MpPaModel& model);

/// MIMO sensing channel at one grid cell with hardware impairments: mutual
/// coupling (Toeplitz rho^|i-j|), per-element calibration errors
/// (1+g) e^{j phi}, and element-position jitter (fraction of the spacing).
/// All impairments zero reduces to A_R Delta A_T^H.
CMat build_impaired_mimo_channel(const ArrayConfig& arrays, const FrameConfig& cfg,
                                 const std::vector<Target>& targets, double coupling_rho,
                                 double cal_gain_std, double cal_phase_std,
                                 double spacing_jitter_std, int n, int m,
                                 std::uint64_t seed);

} // namespace isac::channel
