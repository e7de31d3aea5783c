#include "isac/kpi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace isac::kpi {

namespace {

double rms_bandwidth(const FrameConfig& cfg)
{
    const double n = cfg.n_subcarriers;
    return cfg.subcarrier_spacing * std::sqrt(n * n - 1.0);
}

double rms_duration(const FrameConfig& cfg)
{
    const double m = cfg.n_symbols;
    return cfg.symbol_duration() * std::sqrt(m * m - 1.0);
}

double rms_aperture(const ArrayConfig& arrays)
{
    const double nr = arrays.n_rx;
    return arrays.element_spacing * std::sqrt(nr * nr - 1.0);
}

} // namespace

CrbBounds crb_bounds(double gamma, const FrameConfig& cfg, const ArrayConfig& arrays,
                     double phi)
{
    cfg.validate();
    arrays.validate();
    if (!(gamma > 0))
        throw std::invalid_argument("crb_bounds: gamma must be > 0");
    const double cphi = std::cos(phi);
    if (!(cphi > 0))
        throw std::invalid_argument("crb_bounds: endfire angle (cos(phi) <= 0) makes "
                                    "the angle bound singular");

    const double c = kSpeedOfLight;
    const double b = rms_bandwidth(cfg);
    const double ttot = rms_duration(cfg);
    const double d = rms_aperture(arrays);
    const double lambda = arrays.wavelength();
    const double fc = arrays.carrier_freq;
    const double pi2 = kPi * kPi;

    CrbBounds out;
    out.range = 3.0 * c * c / (8.0 * gamma * pi2 * b * b);
    out.velocity = ttot > 0 ? 3.0 * c * c / (8.0 * gamma * pi2 * fc * fc * ttot * ttot)
                            : std::numeric_limits<double>::infinity();
    out.angle = d > 0 ? 3.0 * lambda * lambda / (2.0 * gamma * pi2 * d * d * cphi * cphi)
                      : std::numeric_limits<double>::infinity();
    return out;
}

Resolutions resolutions(const FrameConfig& cfg, const ArrayConfig& arrays)
{
    cfg.validate();
    arrays.validate();
    const double b = rms_bandwidth(cfg);
    const double ttot = rms_duration(cfg);
    const double d = rms_aperture(arrays);
    const double lambda = arrays.wavelength();

    Resolutions out;
    out.range = kSpeedOfLight / (2.0 * b);
    out.velocity = ttot > 0 ? lambda / (2.0 * ttot)
                            : std::numeric_limits<double>::infinity();
    out.angle = d > 0 ? 0.89 * lambda / d : std::numeric_limits<double>::infinity();
    return out;
}

double achievable_rate(const CMat& h, const RMat& p, double noise_var)
{
    if (h.rows != p.rows || h.cols != p.cols)
        throw std::invalid_argument("achievable_rate: gain and power shapes differ");
    if (!(noise_var > 0))
        throw std::invalid_argument("achievable_rate: noise_var must be > 0");
    double rate = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
        if (p.data[i] < 0)
            throw std::invalid_argument("achievable_rate: negative power entry");
        rate += std::log2(1.0 + p.data[i] * std::norm(h.data[i]) / noise_var);
    }
    return rate;
}

MiReward mi_reward(const std::vector<Assign>& w, const std::vector<double>& p,
                   const std::vector<double>& q_sensing,
                   const std::vector<double>& q_comm)
{
    const std::size_t n = w.size();
    if (p.size() != n || q_sensing.size() != n || q_comm.size() != n)
        throw std::invalid_argument("mi_reward: input length mismatch");
    MiReward out;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] == Assign::sensing)
            out.sensing += std::log2(1.0 + q_sensing[i] * p[i]);
        else
            out.comm += std::log2(1.0 + q_comm[i] * p[i]);
    }
    return out;
}

std::string to_json(const KpiReport& r)
{
    nlohmann::json j;
    j["crb_range_m2"] = r.crb_range;
    j["crb_velocity_mps2"] = r.crb_velocity;
    j["crb_angle_rad2"] = r.crb_angle;
    j["res_range_m"] = r.res_range;
    j["res_velocity_mps"] = r.res_velocity;
    j["res_angle_rad"] = r.res_angle;
    j["pd"] = r.pd;
    j["rate_bits"] = r.rate;
    j["mi_sensing_bits"] = r.mi_sensing;
    j["mi_comm_bits"] = r.mi_comm;
    return j.dump(2);
}

} // namespace isac::kpi
