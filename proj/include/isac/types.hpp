/**
 * @file types.hpp
 * @brief Frame, array and scene configuration records shared by all modules.
 */
#pragma once

#include <cstdint>
#include <string>

#include "isac/common.hpp"

namespace isac {

/// OFDM frame geometry and power budget.
struct FrameConfig {
    int n_subcarriers = 0;          ///< N, fast-time grid size
    int n_symbols = 0;              ///< M, slow-time grid size
    double subcarrier_spacing = 0;  ///< Hz
    double cp_duration = 0;         ///< s, cyclic prefix
    double carrier_freq = 0;        ///< Hz
    double total_power = 0;         ///< frame power budget, summed over the grid

    double elem_duration() const { return 1.0 / subcarrier_spacing; }  ///< T = 1/Δf
    double symbol_duration() const { return cp_duration + elem_duration(); }
    double sample_rate() const { return n_subcarriers * subcarrier_spacing; }
    double wavelength() const { return kSpeedOfLight / carrier_freq; }

    void validate() const;
};

/// Uniform linear array geometry, shared carrier with the frame.
struct ArrayConfig {
    int n_tx = 1;
    int n_rx = 1;
    int n_comm = 1;              ///< comm receiver elements
    double element_spacing = 0;  ///< m
    double carrier_freq = 0;     ///< Hz

    double wavelength() const { return kSpeedOfLight / carrier_freq; }

    void validate() const;
};

/// Point scatterer. Delay/Doppler are the propagation values before any
/// synchronization offsets are folded in.
struct Target {
    double delay = 0;    ///< s, >= 0
    double doppler = 0;  ///< Hz
    double aod = 0;      ///< rad, departure angle
    double aoa = 0;      ///< rad, arrival angle
    cplx gain{0, 0};     ///< complex amplitude
};

/// Receiver-side synchronization mismatches. All zero in monostatic mode.
struct SyncOffsets {
    double cfo = 0;           ///< Hz, radar receive chain
    double delay_offset = 0;  ///< s, clock/timing offset
    double comm_cfo = 0;      ///< Hz, comm receive chain
};

/// Checks a power grid against a frame budget: nonnegative entries summing
/// to total_power within relative 1e-9.
void validate_power_grid(const RMat& p, const FrameConfig& cfg);

} // namespace isac
