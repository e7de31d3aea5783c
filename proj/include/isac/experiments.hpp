#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/scenario_io.hpp"

namespace isac::exp {

/// Batch-run request as assembled by the CLI.
struct RunArgs {
    std::string experiment;
    std::string scenario_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0; ///< 0 = library default
    bool overwrite = false;
};

std::vector<std::string> experiment_names();

/// Executes one named experiment and writes its artifacts plus manifest.json
/// under out_dir. Throws std::invalid_argument for unknown names or schema
/// problems and std::runtime_error for I/O failures or an existing manifest
/// without --overwrite.
void run_experiment(const RunArgs& args);

// ---- Reusable Monte-Carlo metric kernels (also used by the CLI) ----

/// Moving-vs-static comparison: median sidelobe-floor rise near the strongest
/// target and how often at least one weaker target drops below the detection
/// threshold when everything moves.
struct IciImpactMetrics {
    double v_static = 0;
    double v_moving = 0;
    double floor_rise_db_median = 0;
    double weak_loss_rate = 0;
};

IciImpactMetrics ici_impact_metrics(const io::ScenarioSpec& spec, int trials);

/// Phase-noise floor rise and the weak-target margin recovered by the
/// compensator, medians over seeds.
struct PnImpactMetrics {
    double floor_rise_db_median = 0;
    double margin_recovery_db_median = 0;
    double margin_pn_db_median = 0;
    double margin_comp_db_median = 0;
};

PnImpactMetrics pn_impact_metrics(const io::ScenarioSpec& spec, int trials);

/// Ambiguity-resolution success rates (velocity via intercarrier coupling,
/// range via oscillator-noise covariance matching).
struct ExploitMetrics {
    double success_rate = 0;
    std::vector<double> estimates;
    double truth = 0;
};

ExploitMetrics ici_exploit_metrics(const io::ScenarioSpec& spec, int trials);

ExploitMetrics pn_exploit_metrics(const io::ScenarioSpec& spec, int trials);

/// Detector calibration: empirical frame-level false-alarm rate against the
/// design point, and on-bin detection probability against the closed form.
struct RocMetrics {
    double pfa_design = 0;
    double pfa_empirical = 0;
    int noise_trials = 0;
    std::vector<double> snr_db;
    std::vector<double> pd_empirical;
    std::vector<double> pd_theory;
};

RocMetrics detection_roc_metrics(const io::ScenarioSpec& spec, int noise_trials,
                                 int pd_trials);

} // namespace isac::exp
