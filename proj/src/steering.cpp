#include "isac/steering.hpp"

#include <string>

namespace isac {

void FrameConfig::validate() const
{
    if (n_subcarriers < 1)
        throw std::invalid_argument("frame.n_subcarriers: must be >= 1");
    if (n_symbols < 1)
        throw std::invalid_argument("frame.n_symbols: must be >= 1");
    if (!(subcarrier_spacing > 0))
        throw std::invalid_argument("frame.subcarrier_spacing_hz: must be > 0");
    if (cp_duration < 0)
        throw std::invalid_argument("frame.cp_duration_s: must be >= 0");
    if (!(carrier_freq > 0))
        throw std::invalid_argument("frame.carrier_freq_hz: must be > 0");
    if (!(total_power > 0))
        throw std::invalid_argument("frame.total_power_w: must be > 0");
}

void ArrayConfig::validate() const
{
    if (n_tx < 1 || n_rx < 1 || n_comm < 1)
        throw std::invalid_argument("arrays: element counts must be >= 1");
    if (element_spacing < 0)
        throw std::invalid_argument("arrays.element_spacing_m: must be >= 0");
    if (!(carrier_freq > 0))
        throw std::invalid_argument("arrays.carrier_freq_hz: must be > 0");
}

void validate_power_grid(const RMat& p, const FrameConfig& cfg)
{
    if (p.rows != static_cast<std::size_t>(cfg.n_subcarriers) ||
        p.cols != static_cast<std::size_t>(cfg.n_symbols))
        throw std::invalid_argument("power grid: shape does not match frame");
    double sum = 0.0;
    for (double v : p.data) {
        if (v < 0)
            throw std::invalid_argument("power grid: negative entry");
        sum += v;
    }
    if (std::abs(sum - cfg.total_power) > 1e-9 * cfg.total_power)
        throw std::invalid_argument("power grid: sum " + std::to_string(sum) +
                                    " != budget " + std::to_string(cfg.total_power));
}

std::vector<cplx> freq_steering(double tau, int n_sub, double scs)
{
    std::vector<cplx> b(n_sub);
    for (int n = 0; n < n_sub; ++n)
        b[n] = std::polar(1.0, -2.0 * kPi * n * scs * tau);
    return b;
}

std::vector<cplx> time_steering(double nu, int n_sym, double t_sym)
{
    std::vector<cplx> c(n_sym);
    for (int m = 0; m < n_sym; ++m)
        c[m] = std::polar(1.0, 2.0 * kPi * m * t_sym * nu);
    return c;
}

std::vector<cplx> array_steering(double angle, int n_elem, double spacing, double lambda)
{
    std::vector<cplx> a(n_elem);
    for (int i = 0; i < n_elem; ++i)
        a[i] = std::polar(1.0, 2.0 * kPi * i * spacing * std::sin(angle) / lambda);
    return a;
}

std::vector<cplx> array_steering(double angle, const std::vector<double>& positions,
                                 double lambda)
{
    std::vector<cplx> a(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
        a[i] = std::polar(1.0, 2.0 * kPi * positions[i] * std::sin(angle) / lambda);
    return a;
}

std::vector<cplx> cfo_phase(double nu, int n_sub, double elem_duration)
{
    std::vector<cplx> d(n_sub);
    for (int l = 0; l < n_sub; ++l)
        d[l] = std::polar(1.0, 2.0 * kPi * elem_duration * l * nu / n_sub);
    return d;
}

double max_phase_excursion(double speed, double carrier_freq, double scs)
{
    return 4.0 * kPi * speed * carrier_freq / (kSpeedOfLight * scs);
}

} // namespace isac
