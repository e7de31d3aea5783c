#include "isac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isac/fft.hpp"
#include "isac/rng.hpp"
#include "isac/steering.hpp"

namespace isac::channel {

namespace {

constexpr std::uint64_t kNoiseTag = 0x4015e;

CMat ones(std::size_t r, std::size_t c) { return CMat(r, c, cplx{1, 0}); }

/// Per-symbol transmit beam response toward `angle`: (a^T F)_m.
std::vector<cplx> beam_response(const std::vector<cplx>& a, const CMat& f)
{
    std::vector<cplx> g(f.cols, cplx{0, 0});
    for (std::size_t m = 0; m < f.cols; ++m)
        for (std::size_t i = 0; i < f.rows; ++i)
            g[m] += a[i] * f(i, m);
    return g;
}

/// Unitary IDFT over fast time, column by column.
void idft_columns(CMat& g)
{
    const int n = int(g.rows);
    const int m = int(g.cols);
    const double scale = 1.0 / std::sqrt(double(n));
    std::vector<cplx> col(n);
    for (int j = 0; j < m; ++j) {
        for (int l = 0; l < n; ++l)
            col[l] = g(l, j);
        fft::backward(col);
        for (int l = 0; l < n; ++l)
            g(l, j) = col[l] * scale;
    }
}

} // namespace

void Scenario::validate() const
{
    frame.validate();
    arrays.validate();
    if (noise_radar < 0 || noise_comm < 0)
        throw std::invalid_argument("noise: variance must be >= 0");
    if (impairment == ImpairmentMode::phase_noise || impairment == ImpairmentMode::both)
        pn_model.validate();
    if (!tx_beams.data.empty() && (tx_beams.rows != std::size_t(arrays.n_tx) ||
                                   tx_beams.cols != std::size_t(frame.n_symbols)))
        throw std::invalid_argument("tx_beams: shape must be n_tx x n_symbols");
    if (!comm_rx_beams.data.empty() && (comm_rx_beams.rows != std::size_t(arrays.n_comm) ||
                                        comm_rx_beams.cols != std::size_t(frame.n_symbols)))
        throw std::invalid_argument("comm_rx_beams: shape must be n_comm x n_symbols");

    if (mode == SensingMode::monostatic) {
        if (sync.cfo != 0 || sync.delay_offset != 0)
            throw std::invalid_argument(
                "sync: monostatic sensing shares the oscillator, offsets must be zero");
        for (std::size_t k = 0; k < targets.size(); ++k)
            if (targets[k].aod != targets[k].aoa)
                throw std::invalid_argument("targets[" + std::to_string(k) +
                                            "]: monostatic requires aod == aoa");
    }

    double tau_min = std::numeric_limits<double>::infinity();
    double tau_max = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k].delay < 0)
            throw std::invalid_argument("targets[" + std::to_string(k) +
                                        "].delay_s: must be >= 0");
        tau_min = std::min(tau_min, targets[k].delay);
        tau_max = std::max(tau_max, targets[k].delay);
    }
    if (!targets.empty() && !allow_delay_beyond_cp) {
        const double spread = mode == SensingMode::monostatic ? tau_max : tau_max - tau_min;
        if (spread > frame.cp_duration + 1e-15)
            throw std::invalid_argument(
                "targets: delay spread exceeds the cyclic prefix; shorten ranges or "
                "extend cp_duration");
    }
}

RadarFrame simulate_radar_frame(const Scenario& sc, const CMat& x, const RMat& p)
{
    sc.validate();
    validate_power_grid(p, sc.frame);
    const int n = sc.frame.n_subcarriers;
    const int m = sc.frame.n_symbols;
    if (x.rows != std::size_t(n) || x.cols != std::size_t(m))
        throw std::invalid_argument("symbol grid: shape does not match frame");

    const double t_elem = sc.frame.elem_duration();
    const double t_sym = sc.frame.symbol_duration();
    const double lambda = sc.frame.wavelength();
    const int n_rx = sc.arrays.n_rx;
    const CMat f_tx = sc.tx_beams.data.empty() ? ones(sc.arrays.n_tx, m) : sc.tx_beams;

    const bool with_ici = sc.impairment == ImpairmentMode::ici_exact ||
                          sc.impairment == ImpairmentMode::both;
    const bool with_pn = sc.impairment == ImpairmentMode::phase_noise ||
                         sc.impairment == ImpairmentMode::both;

    std::vector<pn::PnGrid> pn_grids;
    if (with_pn) {
        std::vector<double> taus;
        for (const auto& t : sc.targets)
            taus.push_back(t.delay);
        pn_grids = pn::self_referenced_pn_multi(sc.pn_model, taus, sc.frame,
                                                substream(sc.seed, 0x9e0));
    }

    RadarFrame out;
    out.cfg = sc.frame;
    out.seed = sc.seed;
    if (with_ici)
        out.impairments.push_back("ici_exact");
    if (with_pn)
        out.impairments.push_back(sc.pn_model.kind == pn::PnModel::Kind::free_running
                                      ? "phase_noise(free_running)"
                                      : "phase_noise(pll)");
    out.y.assign(n_rx, CMat(n, m));

    for (std::size_t k = 0; k < sc.targets.size(); ++k) {
        const Target& tg = sc.targets[k];
        const double tau_eff = tg.delay + sc.sync.delay_offset;
        const double nu_eff = tg.doppler + sc.sync.cfo;

        const auto b = freq_steering(tau_eff, n, sc.frame.subcarrier_spacing);
        const auto c = time_steering(nu_eff, m, t_sym);
        const auto at = array_steering(tg.aod, sc.arrays.n_tx, sc.arrays.element_spacing,
                                       lambda);
        const auto ar = array_steering(tg.aoa, n_rx, sc.arrays.element_spacing, lambda);
        const auto tb = beam_response(at, f_tx);

        CMat s(n, m);
        for (int kk = 0; kk < n; ++kk)
            for (int j = 0; j < m; ++j)
                s(kk, j) = std::sqrt(p(kk, j)) * x(kk, j) * b[kk] * c[j] * tb[j];
        idft_columns(s);

        if (with_ici) {
            const auto d = cfo_phase(nu_eff, n, t_elem);
            for (int l = 0; l < n; ++l)
                for (int j = 0; j < m; ++j)
                    s(l, j) *= d[l];
        }
        if (with_pn) {
            const CMat& w = pn_grids[k].w;
            for (std::size_t i = 0; i < s.data.size(); ++i)
                s.data[i] *= w.data[i];
        }

        for (int i = 0; i < n_rx; ++i) {
            const cplx a = tg.gain * ar[i];
            CMat& yi = out.y[i];
            for (std::size_t q = 0; q < s.data.size(); ++q)
                yi.data[q] += a * s.data[q];
        }
    }

    // Receive-chain frequency offset applies to the summed echo. With the
    // exact per-target mixing model the offset is already inside nu_eff.
    if (!with_ici && sc.sync.cfo != 0) {
        const auto d = cfo_phase(sc.sync.cfo, n, t_elem);
        for (int i = 0; i < n_rx; ++i)
            for (int l = 0; l < n; ++l)
                for (int j = 0; j < m; ++j)
                    out.y[i](l, j) *= d[l];
    }

    if (sc.noise_radar > 0) {
        for (int i = 0; i < n_rx; ++i) {
            Rng rng = make_rng(substream(sc.seed, kNoiseTag + std::uint64_t(i)));
            CMat z(n, m);
            fill_noise(z, sc.noise_radar, rng);
            for (std::size_t q = 0; q < z.data.size(); ++q)
                out.y[i].data[q] += z.data[q];
        }
    }
    return out;
}

CommFrame simulate_comm_frame(const Scenario& sc, const CMat& x, const RMat& p)
{
    sc.validate();
    validate_power_grid(p, sc.frame);
    const int n = sc.frame.n_subcarriers;
    const int m = sc.frame.n_symbols;
    if (x.rows != std::size_t(n) || x.cols != std::size_t(m))
        throw std::invalid_argument("symbol grid: shape does not match frame");

    const double t_sym = sc.frame.symbol_duration();
    const double lambda = sc.frame.wavelength();
    const CMat f_tx = sc.tx_beams.data.empty() ? ones(sc.arrays.n_tx, m) : sc.tx_beams;
    const CMat v_rx = sc.comm_rx_beams.data.empty() ? ones(sc.arrays.n_comm, m)
                                                    : sc.comm_rx_beams;

    CommFrame out;
    out.h = CMat(n, m);
    for (const CommPath& path : sc.comm_paths) {
        const double nu = sc.quasi_static_comm ? 0.0 : path.doppler;
        const auto b = freq_steering(path.delay, n, sc.frame.subcarrier_spacing);
        const auto c = time_steering(nu, m, t_sym);
        const auto at = array_steering(path.aod, sc.arrays.n_tx, sc.arrays.element_spacing,
                                       lambda);
        const auto ac = array_steering(path.aoa, sc.arrays.n_comm,
                                       sc.arrays.element_spacing, lambda);
        const auto tb = beam_response(at, f_tx);
        const auto rb = beam_response(ac, v_rx);
        for (int kk = 0; kk < n; ++kk)
            for (int j = 0; j < m; ++j)
                out.h(kk, j) += path.gain * b[kk] * c[j] * tb[j] * rb[j];
    }

    out.y = CMat(n, m);
    for (int kk = 0; kk < n; ++kk)
        for (int j = 0; j < m; ++j)
            out.y(kk, j) = std::sqrt(p(kk, j)) * x(kk, j) * out.h(kk, j);
    idft_columns(out.y);

    if (sc.sync.comm_cfo != 0) {
        const auto d = cfo_phase(sc.sync.comm_cfo, n, sc.frame.elem_duration());
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < m; ++j)
                out.y(l, j) *= d[l];
    }
    if (sc.noise_comm > 0) {
        Rng rng = make_rng(substream(sc.seed, 0xc0313));
        CMat z(n, m);
        fill_noise(z, sc.noise_comm, rng);
        for (std::size_t q = 0; q < z.data.size(); ++q)
            out.y.data[q] += z.data[q];
    }
    return out;
}

CMat build_si_channel(const ArrayConfig& arrays, double coupling_db, std::uint64_t seed,
                      double aod, double aoa)
{
    arrays.validate();
    CMat h(arrays.n_rx, arrays.n_tx);
    if (std::isinf(coupling_db) && coupling_db < 0)
        return h;
    const auto at = array_steering(aod, arrays.n_tx, arrays.element_spacing,
                                   arrays.wavelength());
    const auto ar = array_steering(aoa, arrays.n_rx, arrays.element_spacing,
                                   arrays.wavelength());
    Rng rng = make_rng(substream(seed, 0x51));
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    const cplx g = std::polar(db_to_pow(coupling_db / 2.0), ph(rng));
    const double scale = std::sqrt(double(arrays.n_rx) * double(arrays.n_tx));
    for (int i = 0; i < arrays.n_rx; ++i)
        for (int j = 0; j < arrays.n_tx; ++j)
            h(i, j) = g * ar[i] * at[j] / scale;
    return h;
}

void MpPaModel::validate() const
{
    if (max_order < 1 || max_order % 2 == 0)
        throw std::invalid_argument("pa_model.max_order: must be odd and >= 1");
    if (memory < 0)
        throw std::invalid_argument("pa_model.memory: must be >= 0");
    if (coeffs.rows != std::size_t((max_order + 1) / 2) ||
        coeffs.cols != std::size_t(memory + 1))
        throw std::invalid_argument("pa_model.coeffs: shape mismatch");
}

waveform::SampleStream apply_pa(const waveform::SampleStream& s, const MpPaModel& model)
{
    model.validate();
    waveform::SampleStream out;
    out.fs = s.fs;
    out.t0 = s.t0;
    out.x.assign(s.x.size(), cplx{0, 0});
    const long n = long(s.x.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        cplx acc{0, 0};
        for (int mm = 0; mm <= model.memory; ++mm) {
            if (i - mm < 0)
                break;
            const cplx v = s.x[i - mm];
            const double mag = std::abs(v);
            double env = 1.0;  // |x|^(p-1) for p = 2q+1
            for (int q = 0; q * 2 + 1 <= model.max_order; ++q) {
                acc += model.coeffs(q, mm) * v * env;
                env *= mag * mag;
            }
        }
        out.x[i] = acc;
    }
    return out;
}

CMat build_impaired_mimo_channel(const ArrayConfig& arrays, const FrameConfig& cfg,
                                 const std::vector<Target>& targets, double coupling_rho,
                                 double cal_gain_std, double cal_phase_std,
                                 double spacing_jitter_std, int n, int m,
                                 std::uint64_t seed)
{
    arrays.validate();
    cfg.validate();
    if (coupling_rho < 0 || coupling_rho >= 1)
        throw std::invalid_argument("coupling_rho: must be in [0, 1)");
    const int nt = arrays.n_tx, nr = arrays.n_rx;
    const double lambda = arrays.wavelength();
    Rng rng = make_rng(substream(seed, 0x310));
    std::normal_distribution<double> g(0.0, 1.0);

    auto positions = [&](int count) {
        std::vector<double> p(count);
        for (int i = 0; i < count; ++i)
            p[i] = (i + spacing_jitter_std * g(rng)) * arrays.element_spacing;
        return p;
    };
    auto cal = [&](int count) {
        std::vector<cplx> c(count);
        for (int i = 0; i < count; ++i)
            c[i] = (1.0 + cal_gain_std * g(rng)) * std::polar(1.0, cal_phase_std * g(rng));
        return c;
    };
    const auto pos_t = positions(nt);
    const auto pos_r = positions(nr);
    const auto gam_t = cal(nt);
    const auto gam_r = cal(nr);

    // inner = Gamma_R A_R Delta A_T^H Gamma_T^*
    CMat inner(nr, nt);
    for (const Target& tg : targets) {
        const cplx delta = tg.gain *
            std::polar(1.0, -2.0 * kPi * n * cfg.subcarrier_spacing * tg.delay) *
            std::polar(1.0, 2.0 * kPi * m * cfg.symbol_duration() * tg.doppler);
        const auto ar = array_steering(tg.aoa, pos_r, lambda);
        const auto at = array_steering(tg.aod, pos_t, lambda);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nt; ++j)
                inner(i, j) += gam_r[i] * ar[i] * delta * std::conj(at[j]) *
                               std::conj(gam_t[j]);
    }

    auto couple = [&](int i, int j) {
        return i == j ? 1.0 : std::pow(coupling_rho, double(std::abs(i - j)));
    };
    CMat h(nr, nt);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
            cplx acc{0, 0};
            for (int a = 0; a < nr; ++a)
                for (int b = 0; b < nt; ++b)
                    acc += couple(i, a) * inner(a, b) * couple(b, j);
            h(i, j) = acc;
        }
    return h;
}

} // namespace isac::channel
