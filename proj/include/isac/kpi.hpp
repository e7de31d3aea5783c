#pragma once

#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac::kpi {

/// Closed-form single-target estimation bounds, all for unit-amplitude symbols
/// with uniform power at post-processing SNR `gamma`.
struct CrbBounds {
    double range = 0;    ///< m^2
    double velocity = 0; ///< (m/s)^2
    double angle = 0;    ///< rad^2
};

/// Bounds use the RMS apertures B = scs*sqrt(N^2-1), Ttot = Tsym*sqrt(M^2-1),
/// D = d*sqrt(Nr^2-1). A single receive antenna yields an infinite angle bound.
/// Throws std::invalid_argument for gamma <= 0 or cos(phi) <= 0 (endfire).
CrbBounds crb_bounds(double gamma, const FrameConfig& cfg, const ArrayConfig& arrays,
                     double phi);

struct Resolutions {
    double range = 0;    ///< m
    double velocity = 0; ///< m/s
    double angle = 0;    ///< rad
};

/// Classical resolution widths c/(2B), lambda/(2*Ttot), 0.89*lambda/D with the
/// same apertures as crb_bounds.
Resolutions resolutions(const FrameConfig& cfg, const ArrayConfig& arrays);

/// Sum rate in bits over the frame: sum log2(1 + p|h|^2 / noise_var).
/// `h` holds per-cell channel gains, `p` the matching power grid.
double achievable_rate(const CMat& h, const RMat& p, double noise_var);

enum class Assign : unsigned char { sensing, comm };

/// Indicator-gated mutual-information rewards: subcarrier n contributes
/// log2(1 + q_{w_n,n} p_n) to the receiver it is assigned to.
struct MiReward {
    double sensing = 0;
    double comm = 0;
};

MiReward mi_reward(const std::vector<Assign>& w, const std::vector<double>& p,
                   const std::vector<double>& q_sensing,
                   const std::vector<double>& q_comm);

/// One-stop KPI bundle serialized next to every experiment run.
struct KpiReport {
    double crb_range = 0;
    double crb_velocity = 0;
    double crb_angle = 0;
    double res_range = 0;
    double res_velocity = 0;
    double res_angle = 0;
    double pd = 0;
    double rate = 0;
    double mi_sensing = 0;
    double mi_comm = 0;
};

std::string to_json(const KpiReport& report);

} // namespace isac::kpi
