#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/channel.hpp"

namespace isac::io {

/// Target description as it appears in scenario files: physical quantities
/// plus the echo SNR |gain|^2 / radar noise variance. The map-domain SNR
/// adds the processing gain (total_power, i.e. N*M under the default
/// one-unit-per-cell budget).
struct TargetSpec {
    double range_m = 0;
    double velocity_mps = 0;
    double angle_deg = 0;
    double snr_db = 0;
};

struct CommPathSpec {
    double delay_s = 0;
    double doppler_hz = 0;
    double aod_deg = 0;
    double aoa_deg = 0;
    double gain_db = 0;
};

/// Free-form experiment knobs with schema-checked keys.
struct ExperimentOptions {
    std::vector<double> velocities_mps{0.0, 80.0}; ///< ici-impact sweep
    int trials = 50;                               ///< Monte-Carlo repetitions
    double pfa = 1e-4;                             ///< detector design point
    int span = 3;                                  ///< disambiguation search width
    int pad_n = 4, pad_m = 4;                      ///< map zero-padding
    int mcpc_carriers = 5, mcpc_chips = 5;         ///< mcpc-analysis family
    double mcpc_chip_duration_s = 1e-6;
    std::vector<double> snr_sweep_db{0, 5, 10, 13, 15, 20}; ///< roc / crb sweeps
};

/// Parsed scenario file. `build()` turns it into the simulator's scene with
/// seeded target phases; amplitudes follow |a|^2 = SNR * noise_radar.
struct ScenarioSpec {
    std::uint64_t seed = 0;
    FrameConfig frame;
    ArrayConfig arrays;
    channel::SensingMode mode = channel::SensingMode::monostatic;
    channel::ImpairmentMode impairment = channel::ImpairmentMode::none;
    pn::PnModel pn_model;
    std::vector<TargetSpec> targets;
    std::vector<CommPathSpec> comm_paths;
    SyncOffsets sync;
    double noise_radar = 1.0;
    double noise_comm = 1.0;
    bool allow_delay_beyond_cp = false;
    waveform::Constellation constellation = waveform::Constellation::qpsk;
    ExperimentOptions options;
    std::string json_text; ///< normalized echo for manifests

    channel::Scenario build() const;
};

/// Parses and validates scenario JSON. Violations raise std::invalid_argument
/// with the offending field path ("frame.n_subcarriers: ..."). The seed is
/// mandatory.
ScenarioSpec parse_scenario(const std::string& json_text);

ScenarioSpec load_scenario(const std::string& path);

} // namespace isac::io
