/**
 * @file enhance.hpp
 * @brief Receivers that exploit or suppress the non-ideal effects: joint
 *        Doppler-mixing-aware extraction, oscillator-phase compensation,
 *        velocity and range disambiguation, and self-interference nulling.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "isac/channel.hpp"
#include "isac/common.hpp"
#include "isac/phase_noise.hpp"
#include "isac/radar_rx.hpp"
#include "isac/types.hpp"

namespace isac::enh {

/// Iterative extraction that sweeps candidate fast-time mixing frequencies:
/// each residual is counter-rotated per candidate before mapping and the
/// globally best triple wins. With doppler_grid = {0} this is exactly
/// iterative_target_extraction.
rx::DetectionReport ici_joint_estimate(const CMat& y, const CMat& x, const RMat& p,
                                       const FrameConfig& cfg,
                                       const std::vector<double>& doppler_grid,
                                       int k_max = 5, double residual_threshold = 0.01);

struct PnCompensateResult {
    CMat y_comp;            ///< phase-corrected frame
    RMat xi;                ///< estimated self-referenced phase grid
    rx::Detection dominant; ///< final dominant-echo estimate
};

/// Alternating MAP estimation of the self-referenced oscillator phase and
/// the dominant echo. Small-angle Gaussian model around the dominant echo,
/// analytic covariance prior (Tikhonov-regularized, solved per symbol over
/// the in-symbol band), delay re-estimated each iteration.
PnCompensateResult pn_compensate(const CMat& y, const CMat& x, const RMat& p,
                                 const FrameConfig& cfg, const pn::PnModel& model,
                                 int n_iters = 3);

struct VelocityDisambigResult {
    double velocity = 0;            ///< selected unaliased velocity, m/s
    int q = 0;                      ///< selected interval index
    std::vector<double> peak_mags;  ///< per-candidate compensated peak magnitude
};

/// Tests candidate velocities coarse_v + q * v_amb (v_amb = lambda / 2 Tsym,
/// q in [-span, span]) by counter-rotating the fast-time mixing ramp and
/// keeping the candidate with the strongest matched peak.
VelocityDisambigResult ici_velocity_disambiguate(const CMat& y, const CMat& x,
                                                 const RMat& p, const FrameConfig& cfg,
                                                 double coarse_v, int span,
                                                 int pad_n = 2, int pad_m = 4);

struct RangeDisambigResult {
    double range = 0;           ///< selected unaliased range, m
    int q = 0;                  ///< selected interval index
    std::vector<double> costs;  ///< per-candidate covariance matching cost
    bool reliable = false;      ///< enough strong cells for phase extraction
};

/// Selects among candidate ranges coarse_r + q * r_amb (r_amb = c / 2 scs,
/// q in [0, span)) by matching the empirical lag covariance of the phase
/// extracted from the dominant echo against the analytic model covariance.
/// Monostatic only: the self-referenced phase statistics carry the true
/// delay only when transmit and receive share the oscillator.
RangeDisambigResult pn_range_disambiguate(const CMat& y, const CMat& x, const RMat& p,
                                          const FrameConfig& cfg, const pn::PnModel& model,
                                          channel::SensingMode mode, double coarse_r,
                                          int span);

struct BeamformerSet {
    CMat f_rf;  ///< analog stage, n_tx x l_t
    CMat f_bb;  ///< digital stage, l_t x n_streams
    bool unit_modulus_analog = false;
};

struct SiNullingResult {
    CMat w_rf;            ///< receive analog stage, n_rx x l_r
    double residual = 0;  ///< ||W^H H F_rf F_bb||_F after column normalization
    double rel_residual = 0;
};

/// Left-null-space receive combiner against the direct transmit coupling.
/// Digital mode returns an orthonormal basis (residual <= 1e-10 relative);
/// unit-modulus mode phase-projects with alternating projections and reports
/// the achieved residual.
SiNullingResult design_si_nulling(const CMat& h_si, const CMat& f_rf, const CMat& f_bb,
                                  int l_r, bool unit_modulus = false);

/// Per-stream transmit array gain toward an angle: |a^H (F_rf F_bb)_s|^2.
std::vector<double> transmit_target_gain(const CMat& f_rf, const CMat& f_bb, double theta,
                                         const ArrayConfig& arrays);

} // namespace isac::enh
