#include "isac/waveform.hpp"

#include <algorithm>
#include <numeric>

#include "isac/fft.hpp"
#include "isac/rng.hpp"

namespace isac::waveform {

CMat build_symbol_grid(int n_sub, int n_sym, Constellation kind, std::uint64_t seed)
{
    if (n_sub < 1 || n_sym < 1)
        throw std::invalid_argument("symbol grid: empty dimensions");
    CMat x(n_sub, n_sym);
    Rng rng = make_rng(substream(seed, 0x5ca1ab1e));
    switch (kind) {
    case Constellation::qpsk: {
        std::uniform_int_distribution<int> bits(0, 3);
        const double s = 1.0 / std::sqrt(2.0);
        for (auto& v : x.data) {
            const int b = bits(rng);
            v = {s * (b & 1 ? 1.0 : -1.0), s * (b & 2 ? 1.0 : -1.0)};
        }
        break;
    }
    case Constellation::qam16: {
        std::uniform_int_distribution<int> lev(0, 3);
        const double s = 1.0 / std::sqrt(10.0);
        for (auto& v : x.data)
            v = {s * (2 * lev(rng) - 3.0), s * (2 * lev(rng) - 3.0)};
        break;
    }
    case Constellation::unit_random: {
        std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
        for (auto& v : x.data)
            v = std::polar(1.0, ph(rng));
        break;
    }
    }
    return x;
}

RMat uniform_power_grid(const FrameConfig& cfg)
{
    RMat p(cfg.n_subcarriers, cfg.n_symbols,
           cfg.total_power / (double(cfg.n_subcarriers) * cfg.n_symbols));
    return p;
}

SampleStream ofdm_modulate(const CMat& x, const RMat& p, const FrameConfig& cfg,
                           int oversample)
{
    cfg.validate();
    validate_power_grid(p, cfg);
    if (oversample < 1)
        throw std::invalid_argument("ofdm_modulate: oversample must be >= 1");
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const double fs = cfg.sample_rate() * oversample;
    const int n_body = n * oversample;
    const int n_cp = static_cast<int>(std::lround(cfg.cp_duration * fs));
    if (n_cp > n_body)
        throw std::invalid_argument("ofdm_modulate: cyclic prefix longer than symbol body");

    // Frame energy equals the grid budget, so mean power is Ptot / (M Tsym).
    const double gain = std::sqrt(1.0 / cfg.symbol_duration());

    SampleStream s;
    s.fs = fs;
    s.x.reserve(std::size_t(m) * (n_body + n_cp));
    std::vector<cplx> body(n_body);
    for (int j = 0; j < m; ++j) {
        std::fill(body.begin(), body.end(), cplx{0, 0});
        for (int k = 0; k < n; ++k)
            body[k] = std::sqrt(p(k, j)) * x(k, j);
        fft::backward(body);
        for (auto& v : body)
            v *= gain;
        for (int i = n_body - n_cp; i < n_body; ++i)
            s.x.push_back(body[i]);
        s.x.insert(s.x.end(), body.begin(), body.end());
    }
    return s;
}

double papr(const SampleStream& s)
{
    if (s.x.empty())
        throw std::invalid_argument("papr: empty stream");
    double peak = 0.0, mean = 0.0;
    for (const auto& v : s.x) {
        const double q = std::norm(v);
        peak = std::max(peak, q);
        mean += q;
    }
    mean /= double(s.x.size());
    if (mean == 0.0)
        throw std::invalid_argument("papr: all-zero stream");
    return peak / mean;
}

void McpcConfig::validate() const
{
    if (n_carriers < 1 || n_chips < 1)
        throw std::invalid_argument("mcpc: carrier and chip counts must be >= 1");
    if (!(chip_duration > 0))
        throw std::invalid_argument("mcpc: chip_duration must be > 0");
    if (codes.rows != std::size_t(n_carriers) || codes.cols != std::size_t(n_chips))
        throw std::invalid_argument("mcpc: code matrix shape mismatch");
    if (weights.size() != std::size_t(n_carriers))
        throw std::invalid_argument("mcpc: weight count mismatch");
    for (const auto& c : codes.data)
        if (std::abs(std::abs(c) - 1.0) > 1e-9)
            throw std::invalid_argument("mcpc: non-unit-modulus code entry");
    if (cp_duration < 0)
        throw std::invalid_argument("mcpc: cp_duration must be >= 0");
}

std::vector<cplx> p4_code(int l)
{
    if (l < 1)
        throw std::invalid_argument("p4_code: length must be >= 1");
    std::vector<cplx> c(l);
    for (int i = 0; i < l; ++i)
        c[i] = std::polar(1.0, kPi * double(i) * double(i - l) / double(l));
    return c;
}

std::vector<cplx> zadoff_chu_code(int l, int root)
{
    if (l < 1)
        throw std::invalid_argument("zadoff_chu_code: length must be >= 1");
    if (root < 1 || std::gcd(root, l) != 1)
        throw std::invalid_argument("zadoff_chu_code: root must be coprime with length");
    std::vector<cplx> c(l);
    for (int i = 0; i < l; ++i) {
        const double num = (l % 2 == 0) ? double(i) * i : double(i) * (i + 1);
        c[i] = std::polar(1.0, -kPi * root * num / double(l));
    }
    return c;
}

McpcConfig mcpc_shifted_family(int n_carriers, int n_chips, CodeFamily family,
                               double chip_duration, int root)
{
    std::vector<cplx> base = family == CodeFamily::p4 ? p4_code(n_chips)
                                                      : zadoff_chu_code(n_chips, root);
    McpcConfig cfg;
    cfg.n_carriers = n_carriers;
    cfg.n_chips = n_chips;
    cfg.chip_duration = chip_duration;
    cfg.codes = CMat(n_carriers, n_chips);
    for (int n = 0; n < n_carriers; ++n)
        for (int l = 0; l < n_chips; ++l)
            cfg.codes(n, l) = base[(l + n) % n_chips];
    cfg.weights.assign(n_carriers, cplx{1, 0});
    return cfg;
}

SampleStream mcpc_envelope(const McpcConfig& cfg, double fs)
{
    cfg.validate();
    if (!(fs > 0))
        throw std::invalid_argument("mcpc_envelope: fs must be > 0");
    const int n = cfg.n_carriers;
    const int l_chips = cfg.n_chips;
    const double tc = cfg.chip_duration;
    const long n_total = std::lround(l_chips * tc * fs);
    if (n_total < 1)
        throw std::invalid_argument("mcpc_envelope: fs too low for one sample");

    std::vector<cplx> pulse(n_total);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n_total; ++i) {
        const double t = double(i) / fs;
        const int chip = std::min(int(t / tc), l_chips - 1);
        cplx acc{0, 0};
        for (int k = 0; k < n; ++k) {
            const double f = (k - 0.5 * (n - 1)) / tc;
            acc += cfg.weights[k] * cfg.codes(k, chip) * std::polar(1.0, 2.0 * kPi * f * t);
        }
        pulse[i] = acc;
    }

    SampleStream s;
    s.fs = fs;
    if (cfg.cp_duration > 0) {
        const long n_cp = std::min<long>(std::lround(cfg.cp_duration * fs), n_total);
        s.t0 = -double(n_cp) / fs;
        s.x.assign(pulse.end() - n_cp, pulse.end());
        s.x.insert(s.x.end(), pulse.begin(), pulse.end());
    } else {
        s.x = std::move(pulse);
    }
    return s;
}

SampleStream ofdm_pulse(int n_carriers, const std::vector<cplx>& weights,
                        double chip_duration, double fs)
{
    McpcConfig cfg;
    cfg.n_carriers = n_carriers;
    cfg.n_chips = 1;
    cfg.chip_duration = chip_duration;
    cfg.codes = CMat(n_carriers, 1, cplx{1, 0});
    cfg.weights = weights;
    return mcpc_envelope(cfg, fs);
}

RMat ambiguity_function(const SampleStream& s, const std::vector<double>& delays,
                        const std::vector<double>& dopplers)
{
    const long n = static_cast<long>(s.x.size());
    double e = 0.0;
    for (const auto& v : s.x)
        e += std::norm(v);
    if (n == 0 || e == 0.0)
        throw std::invalid_argument("ambiguity_function: empty or all-zero stream");
    for (double d : delays)
        if (std::labs(std::lround(d * s.fs)) >= n)
            throw std::invalid_argument("ambiguity_function: delay beyond stream support");

    RMat af(delays.size(), dopplers.size());
#pragma omp parallel for schedule(static)
    for (long di = 0; di < long(delays.size()); ++di) {
        const long shift = std::lround(delays[di] * s.fs);
        for (std::size_t vi = 0; vi < dopplers.size(); ++vi) {
            cplx acc{0, 0};
            const long t_lo = std::max<long>(0, shift);
            const long t_hi = std::min<long>(n, n + shift);
            for (long t = t_lo; t < t_hi; ++t)
                acc += s.x[t] * std::conj(s.x[t - shift]) *
                       std::polar(1.0, 2.0 * kPi * dopplers[vi] * double(t) / s.fs);
            af(di, vi) = std::abs(acc) / e;
        }
    }
    return af;
}

double mainlobe_width_3db(const std::vector<double>& cut, double step)
{
    if (cut.size() < 3)
        throw std::invalid_argument("mainlobe_width_3db: cut too short");
    const std::size_t pk = std::max_element(cut.begin(), cut.end()) - cut.begin();
    const double half = 0.5 * cut[pk] * cut[pk];

    auto cross = [&](std::size_t i, std::size_t j) {
        // linear interpolation of squared magnitude between samples i and j
        const double a = cut[i] * cut[i], b = cut[j] * cut[j];
        return b == a ? 0.0 : (a - half) / (a - b);
    };
    double left = 0.0, right = double(cut.size() - 1 - pk);
    for (std::size_t i = pk; i > 0; --i)
        if (cut[i - 1] * cut[i - 1] < half) {
            left = double(pk - i) + cross(i, i - 1);
            break;
        }
    for (std::size_t i = pk; i + 1 < cut.size(); ++i)
        if (cut[i + 1] * cut[i + 1] < half) {
            right = double(i - pk) + cross(i, i + 1);
            break;
        }
    return (left + right) * step;
}

} // namespace isac::waveform
