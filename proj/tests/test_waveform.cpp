// Symbol grids, OFDM synthesis, MCPC pulses, PAPR and ambiguity analysis.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <isac/common.hpp>
#include <isac/reference.hpp>
#include <isac/types.hpp>
#include <isac/waveform.hpp>

using namespace isac;
using namespace isac::waveform;

namespace {

FrameConfig small_frame(int n, int m, double scs = 120e3, double cp_frac = 0.25)
{
    FrameConfig cfg;
    cfg.n_subcarriers = n;
    cfg.n_symbols = m;
    cfg.subcarrier_spacing = scs;
    cfg.cp_duration = cp_frac / scs;
    cfg.carrier_freq = 28e9;
    cfg.total_power = double(n) * m;
    return cfg;
}

double mean_sq(const std::vector<cplx>& v)
{
    double s = 0.0;
    for (const auto& e : v)
        s += std::norm(e);
    return s / double(v.size());
}

} // namespace

TEST_CASE("build_symbol_grid: QPSK and unit-random symbols are constant modulus")
{
    for (auto kind : {Constellation::qpsk, Constellation::unit_random}) {
        const CMat x = build_symbol_grid(32, 8, kind, 11);
        for (const auto& v : x.data)
            CHECK(std::abs(std::abs(v) - 1.0) <= 1e-12);
    }
}

TEST_CASE("build_symbol_grid: 16QAM empirical symbol energy is unit")
{
    const CMat x = build_symbol_grid(128, 128, Constellation::qam16, 5);
    CHECK(mean_sq(x.data) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("build_symbol_grid: deterministic per seed, distinct across seeds")
{
    const CMat a = build_symbol_grid(16, 4, Constellation::qpsk, 42);
    const CMat b = build_symbol_grid(16, 4, Constellation::qpsk, 42);
    const CMat c = build_symbol_grid(16, 4, Constellation::qpsk, 43);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
}

TEST_CASE("uniform_power_grid satisfies the frame budget")
{
    const FrameConfig cfg = small_frame(24, 6);
    CHECK_NOTHROW(validate_power_grid(uniform_power_grid(cfg), cfg));
}

TEST_CASE("ofdm_modulate: a single occupied subcarrier gives a constant-envelope tone")
{
    FrameConfig cfg = small_frame(1, 3);
    cfg.total_power = 2.0;
    CMat x(1, 3, cplx{1.0, 0.0});
    RMat p(1, 3, 2.0 / 3.0);
    const SampleStream s = ofdm_modulate(x, p, cfg);
    REQUIRE(!s.x.empty());
    const double a0 = std::abs(s.x.front());
    for (const auto& v : s.x)
        CHECK(std::abs(v) == doctest::Approx(a0).epsilon(1e-12));
    CHECK(papr(s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ofdm_modulate: sampling the symbol bodies and transforming recovers the grid")
{
    const int n = 32, m = 4;
    const FrameConfig cfg = small_frame(n, m);
    const CMat x = build_symbol_grid(n, m, Constellation::qpsk, 3);
    const RMat p = uniform_power_grid(cfg);
    const SampleStream s = ofdm_modulate(x, p, cfg);

    const int n_cp = int(std::lround(cfg.cp_duration * s.fs));
    REQUIRE(s.x.size() == std::size_t(m) * (n + n_cp));

    // Forward-transform each CP-stripped body; entries must match sqrt(P).X
    // up to one global complex scale.
    cplx scale{0, 0};
    for (int j = 0; j < m; ++j) {
        std::vector<cplx> body(s.x.begin() + j * (n + n_cp) + n_cp,
                               s.x.begin() + (j + 1) * (n + n_cp));
        const auto spec = reference::dft(body, -1);
        for (int k = 0; k < n; ++k) {
            const cplx want = std::sqrt(p(k, j)) * x(k, j);
            if (j == 0 && k == 0)
                scale = spec[0] / want;
            CHECK(std::abs(spec[k] - scale * want) <= 1e-9 * std::abs(scale * want));
        }
    }
}

TEST_CASE("ofdm_modulate: mean stream power matches the frame budget")
{
    const int n = 256, m = 8;
    const FrameConfig cfg = small_frame(n, m);
    const CMat x = build_symbol_grid(n, m, Constellation::qpsk, 9);
    const SampleStream s = ofdm_modulate(x, uniform_power_grid(cfg), cfg);
    const double want = cfg.total_power / (m * cfg.symbol_duration());
    CHECK(mean_sq(s.x) == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("ofdm_modulate: rejects mismatched grids and undersized oversampling")
{
    const FrameConfig cfg = small_frame(8, 2);
    const CMat x = build_symbol_grid(8, 2, Constellation::qpsk, 1);
    CHECK_THROWS_AS(ofdm_modulate(x, RMat(4, 2, 1.0), cfg), std::invalid_argument);
    CHECK_THROWS_AS(ofdm_modulate(x, uniform_power_grid(cfg), cfg, 0),
                    std::invalid_argument);
}

TEST_CASE("cyclic prefix arithmetic: fraction 0.07 of a 30 kHz symbol is 2.33 us")
{
    FrameConfig cfg = small_frame(64, 4, 30e3);
    cfg.cp_duration = 0.07 / 30e3;
    CHECK(cfg.cp_duration == doctest::Approx(2.33e-6).epsilon(2e-3));
}

TEST_CASE("papr: aligned unmodulated carriers peak at N, and scaling cancels")
{
    const int n = 8;
    const double tc = 1e-6;
    const std::vector<cplx> w(n, cplx{1.0, 0.0});
    SampleStream s = ofdm_pulse(n, w, tc, 4.0 * n / tc);
    CHECK(papr(s) == doctest::Approx(double(n)).epsilon(1e-9));

    SampleStream scaled = s;
    for (auto& v : scaled.x)
        v *= cplx{37.0, -12.0};
    CHECK(papr(scaled) == doctest::Approx(papr(s)).epsilon(1e-12));

    SampleStream empty;
    empty.fs = 1.0;
    CHECK_THROWS_AS(papr(empty), std::invalid_argument);
}

TEST_CASE("papr: multicarrier QPSK beats the single-carrier stream on every seed")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const FrameConfig cfg = small_frame(256, 1);
        const CMat x = build_symbol_grid(256, 1, Constellation::qpsk, seed);
        const SampleStream ofdm = ofdm_modulate(x, uniform_power_grid(cfg), cfg);

        SampleStream sc; // single-carrier: one QPSK symbol per sample
        sc.fs = cfg.sample_rate();
        sc.x = x.data;
        CHECK(papr(ofdm) > papr(sc));
    }
}

TEST_CASE("code families: unit modulus and coprime-root checks")
{
    for (const auto& c : p4_code(16))
        CHECK(std::abs(std::abs(c) - 1.0) <= 1e-12);
    for (const auto& c : zadoff_chu_code(13, 5))
        CHECK(std::abs(std::abs(c) - 1.0) <= 1e-12);
    CHECK_THROWS_AS(zadoff_chu_code(12, 4), std::invalid_argument);

    const McpcConfig fam = mcpc_shifted_family(5, 7, CodeFamily::p4, 1e-6);
    CHECK_NOTHROW(fam.validate());
    const auto base = p4_code(7);
    for (int n = 0; n < 5; ++n)
        for (int l = 0; l < 7; ++l)
            CHECK(std::abs(fam.codes(n, l) - base[(l + n) % 7]) <= 1e-12);
}

TEST_CASE("mcpc_envelope: one chip with all-ones codes is exactly the OFDM pulse")
{
    const int n = 8;
    const double tc = 2e-6, fs = 4.0 * n / tc;
    McpcConfig cfg;
    cfg.n_carriers = n;
    cfg.n_chips = 1;
    cfg.chip_duration = tc;
    cfg.codes = CMat(n, 1, cplx{1.0, 0.0});
    cfg.weights.assign(n, cplx{1.0, 0.0});

    const SampleStream a = mcpc_envelope(cfg, fs);
    const SampleStream b = ofdm_pulse(n, cfg.weights, tc, fs);
    REQUIRE(a.x.size() == b.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i)
        CHECK(a.x[i] == b.x[i]);
}

TEST_CASE("mcpc_envelope: a single carrier reproduces the chip phases")
{
    const int l = 9;
    const double tc = 1e-6, fs = 8.0 / tc;
    McpcConfig cfg;
    cfg.n_carriers = 1;
    cfg.n_chips = l;
    cfg.chip_duration = tc;
    cfg.codes = CMat(1, l);
    const auto code = p4_code(l);
    for (int i = 0; i < l; ++i)
        cfg.codes(0, i) = code[i];
    cfg.weights.assign(1, cplx{1.0, 0.0});

    const SampleStream s = mcpc_envelope(cfg, fs);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        const int chip = std::min(int(double(i) / fs / tc), l - 1);
        CHECK(std::abs(s.x[i] - code[chip]) <= 1e-12);
    }
}

TEST_CASE("mcpc autocorrelation mainlobe width is near Tc/N")
{
    const int n = 8, l = 8;
    const double tc = 1e-6, fs = 16.0 * n / tc;
    const McpcConfig cfg = mcpc_shifted_family(n, l, CodeFamily::p4, tc);
    const SampleStream s = mcpc_envelope(cfg, fs);

    const double dt = 1.0 / fs;
    std::vector<double> delays;
    for (int k = -48; k <= 48; ++k)
        delays.push_back(k * dt);
    const RMat af = ambiguity_function(s, delays, {0.0});
    std::vector<double> cut(af.rows);
    for (std::size_t i = 0; i < af.rows; ++i)
        cut[i] = af(i, 0);

    const double width = mainlobe_width_3db(cut, dt);
    CHECK(width == doctest::Approx(tc / n).epsilon(0.20));
}

TEST_CASE("mcpc ambiguity Doppler mainlobe width is near one over the pulse duration")
{
    const int n = 5, l = 5;
    const double tc = 1e-6, fs = 8.0 * n / tc;
    const McpcConfig cfg = mcpc_shifted_family(n, l, CodeFamily::p4, tc);
    const SampleStream s = mcpc_envelope(cfg, fs);

    const double t_pulse = l * tc;
    const double dv = 1.0 / (32.0 * t_pulse);
    std::vector<double> dops;
    for (int k = -64; k <= 64; ++k)
        dops.push_back(k * dv);
    const RMat af = ambiguity_function(s, {0.0}, dops);
    std::vector<double> cut(af.cols);
    for (std::size_t j = 0; j < af.cols; ++j)
        cut[j] = af(0, j);

    const double width = mainlobe_width_3db(cut, dv);
    CHECK(width == doctest::Approx(1.0 / t_pulse).epsilon(0.20));
}

TEST_CASE("ambiguity_function: unit at the origin, symmetric under sign flips")
{
    // 32-sample toy stream, compared point by point against its mirror.
    SampleStream s;
    s.fs = 1e6;
    const double ph[32] = {0.3,  2.1, 4.4, 1.0, 5.9, 0.7, 3.3, 2.8, 1.9, 0.2, 5.1,
                           4.0,  2.5, 3.9, 0.9, 1.4, 6.1, 2.2, 3.0, 5.5, 0.5, 1.7,
                           2.95, 4.8, 3.6, 0.1, 5.3, 2.6, 1.2, 4.2, 3.1, 0.8};
    for (int i = 0; i < 32; ++i)
        s.x.push_back(std::polar(1.0 + 0.05 * i, ph[i]));

    std::vector<double> delays, dops;
    for (int k = -3; k <= 3; ++k)
        delays.push_back(k / s.fs);
    for (int k = -2; k <= 2; ++k)
        dops.push_back(k * s.fs / 128.0);

    const RMat af = ambiguity_function(s, delays, dops);
    CHECK(af(3, 2) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < af.rows; ++i)
        for (std::size_t j = 0; j < af.cols; ++j)
            CHECK(af(i, j) ==
                  doctest::Approx(af(af.rows - 1 - i, af.cols - 1 - j)).epsilon(1e-9));

    // Production kernel agrees with the serial reference implementation.
    const RMat ref = reference::ambiguity(s.x, s.fs, delays, dops);
    for (std::size_t i = 0; i < af.size(); ++i)
        CHECK(af.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-12));

    CHECK_THROWS_AS(ambiguity_function(s, {40.0 / s.fs}, {0.0}), std::invalid_argument);
}

TEST_CASE("mcpc spectrum: 99 percent of the energy fits within 1.2x the design bandwidth")
{
    const int n = 8, l = 8;
    const double tc = 1e-6, fs = 8.0 * n / tc;
    const McpcConfig cfg = mcpc_shifted_family(n, l, CodeFamily::zadoff_chu, tc);
    const SampleStream s = mcpc_envelope(cfg, fs);

    const auto spec = reference::dft(s.x, -1);
    std::vector<double> e(spec.size());
    double total = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        e[i] = std::norm(spec[i]);
        total += e[i];
    }
    std::sort(e.rbegin(), e.rend());
    double acc = 0.0;
    std::size_t bins = 0;
    while (acc < 0.99 * total && bins < e.size())
        acc += e[bins++];
    const double bw = double(bins) * fs / double(e.size());
    CHECK(bw <= 1.2 * n / tc);
    CHECK(bw >= 0.5 * n / tc);
}

TEST_CASE("mainlobe_width_3db: exact on a triangular cut")
{
    // Squared magnitudes are 0, 0.25, 1, 0.25, 0; the half level 0.5 sits
    // two thirds of the way down each flank under linear interpolation.
    const std::vector<double> cut = {0.0, 0.5, 1.0, 0.5, 0.0};
    CHECK(mainlobe_width_3db(cut, 0.25) ==
          doctest::Approx(2.0 * (2.0 / 3.0) * 0.25).epsilon(1e-12));
    CHECK_THROWS_AS(mainlobe_width_3db({1.0, 0.5}, 1.0), std::invalid_argument);
}
