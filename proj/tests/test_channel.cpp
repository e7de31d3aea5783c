// Scene synthesis: radar/comm observations, SI and impaired-array channels,
// and the memory-polynomial amplifier.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <isac/channel.hpp>
#include <isac/common.hpp>
#include <isac/steering.hpp>
#include <isac/types.hpp>
#include <isac/waveform.hpp>

using namespace isac;
using namespace isac::channel;

namespace {

Scenario base_scenario(int n, int m, double scs = 120e3, double cp_frac = 0.25)
{
    Scenario sc;
    sc.frame.n_subcarriers = n;
    sc.frame.n_symbols = m;
    sc.frame.subcarrier_spacing = scs;
    sc.frame.cp_duration = cp_frac / scs;
    sc.frame.carrier_freq = 28e9;
    sc.frame.total_power = double(n) * m;
    sc.arrays.n_tx = 1;
    sc.arrays.n_rx = 1;
    sc.arrays.n_comm = 1;
    sc.arrays.carrier_freq = sc.frame.carrier_freq;
    sc.arrays.element_spacing = sc.frame.wavelength() / 2.0;
    sc.seed = 2024;
    return sc;
}

// Direct evaluation of the noiseless single-antenna observation: frequency
// response per cell, then a unitary inverse transform over fast time.
CMat brute_force_frame(const Scenario& sc, const CMat& x, const RMat& p)
{
    const int n = sc.frame.n_subcarriers;
    const int m = sc.frame.n_symbols;
    const double t_sym = sc.frame.symbol_duration();
    CMat y(n, m);
    for (const Target& tg : sc.targets) {
        const double tau = tg.delay + sc.sync.delay_offset;
        const double nu = tg.doppler + sc.sync.cfo;
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < m; ++j) {
                cplx acc{0, 0};
                for (int k = 0; k < n; ++k)
                    acc += std::sqrt(p(k, j)) * x(k, j) *
                           std::polar(1.0, -2.0 * kPi * k * sc.frame.subcarrier_spacing * tau) *
                           std::polar(1.0, 2.0 * kPi * k * l / double(n));
                y(l, j) += tg.gain * std::polar(1.0, 2.0 * kPi * j * t_sym * nu) * acc /
                           std::sqrt(double(n));
            }
    }
    // Without exact intercarrier mixing the receive-chain offset still rotates
    // within each symbol body, as one ramp common to all echoes.
    if (sc.sync.cfo != 0.0) {
        const auto d = cfo_phase(sc.sync.cfo, n, sc.frame.elem_duration());
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < m; ++j)
                y(l, j) *= d[l];
    }
    return y;
}

double rel_dist(const CMat& a, const CMat& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        num += std::norm(a.data[i] - b.data[i]);
        den += std::norm(b.data[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("simulate_radar_frame: an empty scene is noise at the configured variance")
{
    Scenario sc = base_scenario(128, 64);
    sc.noise_radar = 2.3;
    const CMat x = waveform::build_symbol_grid(128, 64, waveform::Constellation::qpsk, 1);
    const RMat p = waveform::uniform_power_grid(sc.frame);
    const RadarFrame f = simulate_radar_frame(sc, x, p);
    REQUIRE(f.y.size() == 1);
    double var = 0.0;
    for (const auto& v : f.y[0].data)
        var += std::norm(v);
    var /= double(f.y[0].data.size());
    CHECK(var == doctest::Approx(2.3).epsilon(0.05));
    CHECK(f.impairments.empty());
}

TEST_CASE("simulate_radar_frame: deterministic per seed")
{
    Scenario sc = base_scenario(32, 8);
    sc.targets.push_back({5e-7, 300.0, 0.0, 0.0, cplx{1.0, 0.5}});
    const CMat x = waveform::build_symbol_grid(32, 8, waveform::Constellation::qpsk, 2);
    const RMat p = waveform::uniform_power_grid(sc.frame);
    const RadarFrame a = simulate_radar_frame(sc, x, p);
    const RadarFrame b = simulate_radar_frame(sc, x, p);
    CHECK(a.y[0].data == b.y[0].data);
}

TEST_CASE("simulate_radar_frame: noiseless grids match direct summation")
{
    Scenario sc = base_scenario(16, 4);
    sc.noise_radar = 0.0;
    sc.targets.push_back({4.0 / (16 * 120e3), 0.0, 0.0, 0.0, cplx{0.8, -0.3}});
    const CMat x = waveform::build_symbol_grid(16, 4, waveform::Constellation::qpsk, 3);
    const RMat p = waveform::uniform_power_grid(sc.frame);

    SUBCASE("single static target")
    {
        const RadarFrame f = simulate_radar_frame(sc, x, p);
        CHECK(rel_dist(f.y[0], brute_force_frame(sc, x, p)) <= 1e-9);
    }
    SUBCASE("two moving targets")
    {
        sc.targets.push_back({9.7e-7, 4.1e3, 0.0, 0.0, cplx{-0.2, 0.6}});
        const RadarFrame f = simulate_radar_frame(sc, x, p);
        CHECK(rel_dist(f.y[0], brute_force_frame(sc, x, p)) <= 1e-9);
    }
}

TEST_CASE("simulate_radar_frame: receive antennas carry the arrival-angle phases")
{
    Scenario sc = base_scenario(16, 2);
    sc.arrays.n_rx = 4;
    sc.noise_radar = 0.0;
    const double ang = 0.4;
    sc.targets.push_back({3e-7, 0.0, ang, ang, cplx{1.0, 0.0}});
    const CMat x = waveform::build_symbol_grid(16, 2, waveform::Constellation::qpsk, 4);
    const RMat p = waveform::uniform_power_grid(sc.frame);
    const RadarFrame f = simulate_radar_frame(sc, x, p);
    REQUIRE(f.y.size() == 4);
    const auto ar = array_steering(ang, 4, sc.arrays.element_spacing, sc.frame.wavelength());
    for (int i = 1; i < 4; ++i) {
        // Antenna i is the reference grid scaled by ar[i].
        double num = 0.0, den = 0.0;
        for (std::size_t q = 0; q < f.y[i].data.size(); ++q) {
            num += std::norm(f.y[i].data[q] - ar[i] * f.y[0].data[q]);
            den += std::norm(f.y[0].data[q]);
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
    }
}

TEST_CASE("simulate_radar_frame: frame is linear in the target list")
{
    Scenario both = base_scenario(24, 6);
    both.noise_radar = 0.7;
    const Target t1{5e-7, 1.1e3, 0.0, 0.0, cplx{0.9, 0.1}};
    const Target t2{1.2e-6, -2.3e3, 0.0, 0.0, cplx{-0.4, 0.5}};
    both.targets = {t1, t2};
    Scenario only1 = both, only2 = both, none = both;
    only1.targets = {t1};
    only2.targets = {t2};
    none.targets = {};

    const CMat x = waveform::build_symbol_grid(24, 6, waveform::Constellation::qpsk, 5);
    const RMat p = waveform::uniform_power_grid(both.frame);
    const CMat yb = simulate_radar_frame(both, x, p).y[0];
    const CMat y1 = simulate_radar_frame(only1, x, p).y[0];
    const CMat y2 = simulate_radar_frame(only2, x, p).y[0];
    const CMat y0 = simulate_radar_frame(none, x, p).y[0];
    // Same seed, same noise draw: y_both + y_empty == y_1 + y_2 exactly.
    for (std::size_t q = 0; q < yb.data.size(); ++q)
        CHECK(std::abs(yb.data[q] + y0.data[q] - y1.data[q] - y2.data[q]) <= 1e-9);
}

TEST_CASE("intercarrier mixing is near-identity only in the small-excursion regime")
{
    Scenario sc = base_scenario(64, 8);
    sc.noise_radar = 0.0;
    const CMat x = waveform::build_symbol_grid(64, 8, waveform::Constellation::qpsk, 6);
    const RMat p = waveform::uniform_power_grid(sc.frame);

    auto frame_pair = [&](double speed) {
        const double nu = 2.0 * speed * sc.frame.carrier_freq / kSpeedOfLight;
        sc.targets = {{5e-7, nu, 0.0, 0.0, cplx{1.0, 0.0}}};
        sc.impairment = ImpairmentMode::none;
        const CMat a = simulate_radar_frame(sc, x, p).y[0];
        sc.impairment = ImpairmentMode::ici_exact;
        const CMat b = simulate_radar_frame(sc, x, p).y[0];
        return rel_dist(b, a);
    };

    // 3 m/s at 28 GHz / 120 kHz: excursion 0.029 rad, mixing well under 2%.
    CHECK(frame_pair(3.0) <= 0.02);
    // 20 m/s (excursion 0.196): the first-order ramp term already dominates,
    // but the coherent matched-peak loss stays below 0.2%: |mean d_l| is the
    // Dirichlet value 1 - MPE^2/24 + O(MPE^4).
    const double mpe = max_phase_excursion(20.0, sc.frame.carrier_freq,
                                           sc.frame.subcarrier_spacing);
    const auto d = cfo_phase(2.0 * 20.0 * sc.frame.carrier_freq / kSpeedOfLight,
                             sc.frame.n_subcarriers, sc.frame.elem_duration());
    cplx mean{0, 0};
    for (const auto& v : d)
        mean += v;
    mean /= double(d.size());
    CHECK(std::abs(mean) >= 1.0 - mpe * mpe / 12.0);
    CHECK(std::abs(mean) >= 0.998);
}

TEST_CASE("scenario validation: oscillator sharing and the cyclic-prefix bound")
{
    Scenario sc = base_scenario(32, 4);
    sc.targets.push_back({1e-7, 0.0, 0.0, 0.0, cplx{1.0, 0.0}});

    SUBCASE("monostatic offsets must be zero")
    {
        sc.sync.cfo = 100.0;
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SUBCASE("monostatic departure and arrival angles must agree")
    {
        sc.targets[0].aod = 0.1;
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SUBCASE("delay beyond the prefix is rejected unless explicitly allowed")
    {
        sc.targets[0].delay = sc.frame.cp_duration * 1.5;
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
        sc.allow_delay_beyond_cp = true;
        CHECK_NOTHROW(sc.validate());
    }
    SUBCASE("bistatic mode bounds the delay spread, not the absolute delay")
    {
        sc.mode = SensingMode::bistatic;
        sc.targets[0].delay = sc.frame.cp_duration * 3.0;
        CHECK_NOTHROW(sc.validate());
        sc.targets.push_back(
            {sc.frame.cp_duration * 4.5, 0.0, 0.0, 0.0, cplx{1.0, 0.0}});
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
}

TEST_CASE("bistatic frames are biased by exactly the synchronization offsets")
{
    Scenario sc = base_scenario(64, 16);
    sc.mode = SensingMode::bistatic;
    sc.noise_radar = 1e-8;
    const double tau = 6.0 / (64 * 120e3);
    const double nu = 2.0 * 12.0 * sc.frame.carrier_freq / kSpeedOfLight;
    sc.targets.push_back({tau, nu, 0.2, -0.1, cplx{1.0, 0.0}});
    sc.sync.delay_offset = 2.0 / (64 * 120e3);
    sc.sync.cfo = 0.4 / (16 * sc.frame.symbol_duration());

    const CMat x = waveform::build_symbol_grid(64, 16, waveform::Constellation::qpsk, 7);
    const RMat p = waveform::uniform_power_grid(sc.frame);
    const CMat y = simulate_radar_frame(sc, x, p).y[0];
    CHECK(rel_dist(y, brute_force_frame(sc, x, p)) <= 1e-3); // noise floor only
}

TEST_CASE("simulate_comm_frame: flat unit path reduces to the transformed grid")
{
    Scenario sc = base_scenario(16, 4);
    sc.noise_comm = 0.0;
    sc.comm_paths.push_back({0.0, 0.0, 0.0, 0.0, cplx{1.0, 0.0}});
    const CMat x = waveform::build_symbol_grid(16, 4, waveform::Constellation::qpsk, 8);
    const RMat p = waveform::uniform_power_grid(sc.frame);
    const CommFrame f = simulate_comm_frame(sc, x, p);

    for (const auto& h : f.h.data)
        CHECK(std::abs(h - cplx{1.0, 0.0}) <= 1e-12);
    // y equals the unitary inverse fast-time transform of sqrt(P).X
    Scenario ref = sc;
    ref.comm_paths.clear();
    ref.targets.push_back({0.0, 0.0, 0.0, 0.0, cplx{1.0, 0.0}});
    ref.noise_radar = 0.0;
    CHECK(rel_dist(f.y, brute_force_frame(ref, x, p)) <= 1e-12);
}

TEST_CASE("simulate_comm_frame: quasi-static flag freezes the path Doppler")
{
    Scenario sc = base_scenario(8, 5);
    sc.noise_comm = 0.0;
    sc.comm_paths.push_back({2e-7, 4e3, 0.0, 0.0, cplx{0.7, 0.2}});

    sc.quasi_static_comm = true;
    const CommFrame qs = simulate_comm_frame(
        sc, waveform::build_symbol_grid(8, 5, waveform::Constellation::qpsk, 9),
        waveform::uniform_power_grid(sc.frame));
    for (std::size_t k = 0; k < qs.h.rows; ++k)
        for (std::size_t j = 1; j < qs.h.cols; ++j)
            CHECK(std::abs(qs.h(k, j) - qs.h(k, 0)) <= 1e-12);

    sc.quasi_static_comm = false;
    const CommFrame dy = simulate_comm_frame(
        sc, waveform::build_symbol_grid(8, 5, waveform::Constellation::qpsk, 9),
        waveform::uniform_power_grid(sc.frame));
    CHECK(std::abs(dy.h(0, 1) - dy.h(0, 0)) > 1e-6);
}

TEST_CASE("simulate_comm_frame: multipath subcarrier gains match the path sum")
{
    Scenario sc = base_scenario(32, 2);
    sc.noise_comm = 0.0;
    sc.comm_paths.push_back({2e-7, 0.0, 0.0, 0.0, cplx{1.0, 0.0}});
    sc.comm_paths.push_back({6e-7, 0.0, 0.0, 0.0, cplx{0.0, -0.5}});
    const CommFrame f = simulate_comm_frame(
        sc, waveform::build_symbol_grid(32, 2, waveform::Constellation::qpsk, 10),
        waveform::uniform_power_grid(sc.frame));
    for (int k = 0; k < 32; ++k) {
        cplx want{0, 0};
        for (const auto& path : sc.comm_paths)
            want += path.gain *
                    std::polar(1.0, -2.0 * kPi * k * sc.frame.subcarrier_spacing *
                                        path.delay);
        CHECK(std::abs(f.h(k, 0) - want) <= 1e-12);
    }
}

TEST_CASE("build_si_channel: rank-one coupling at the requested strength")
{
    ArrayConfig arrays;
    arrays.n_tx = 4;
    arrays.n_rx = 8;
    arrays.n_comm = 1;
    arrays.carrier_freq = 28e9;
    arrays.element_spacing = arrays.wavelength() / 2.0;

    SUBCASE("minus-infinity coupling is the zero matrix")
    {
        const CMat h = build_si_channel(arrays, -std::numeric_limits<double>::infinity(), 1);
        for (const auto& v : h.data)
            CHECK(v == cplx{0.0, 0.0});
    }
    SUBCASE("finite coupling: norm pinned, every 2x2 minor vanishes")
    {
        const CMat h = build_si_channel(arrays, -40.0, 2);
        CHECK(frob_norm(h) == doctest::Approx(0.01).epsilon(1e-9));
        for (std::size_t i = 1; i < h.rows; ++i)
            for (std::size_t j = 1; j < h.cols; ++j)
                CHECK(std::abs(h(i, j) * h(0, 0) - h(i, 0) * h(0, j)) <= 1e-12);
    }
}

TEST_CASE("build_impaired_mimo_channel: clean limit and distortion growth")
{
    ArrayConfig arrays;
    arrays.n_tx = 4;
    arrays.n_rx = 4;
    arrays.n_comm = 1;
    arrays.carrier_freq = 28e9;
    arrays.element_spacing = arrays.wavelength() / 2.0;
    FrameConfig cfg;
    cfg.n_subcarriers = 16;
    cfg.n_symbols = 4;
    cfg.subcarrier_spacing = 120e3;
    cfg.cp_duration = 0.25 / 120e3;
    cfg.carrier_freq = 28e9;
    cfg.total_power = 64.0;
    std::vector<Target> paths{{3e-7, 2e3, 0.3, -0.2, cplx{0.8, 0.4}}};

    SUBCASE("all-zero impairments reduce to the steering outer product")
    {
        const CMat h = build_impaired_mimo_channel(arrays, cfg, paths, 0, 0, 0, 0, 2, 1, 3);
        const auto ar = array_steering(-0.2, 4, arrays.element_spacing, arrays.wavelength());
        const auto at = array_steering(0.3, 4, arrays.element_spacing, arrays.wavelength());
        const cplx delta =
            paths[0].gain *
            std::polar(1.0, -2.0 * kPi * 2 * cfg.subcarrier_spacing * paths[0].delay) *
            std::polar(1.0, 2.0 * kPi * 1 * cfg.symbol_duration() * paths[0].doppler);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(h(i, j) - ar[i] * delta * std::conj(at[j])) <= 1e-12);
    }
    SUBCASE("a single path stays rank one under element-level impairments")
    {
        const CMat h =
            build_impaired_mimo_channel(arrays, cfg, paths, 0.0, 0.05, 0.05, 0.02, 0, 0, 4);
        for (int i = 1; i < 4; ++i)
            for (int j = 1; j < 4; ++j)
                CHECK(std::abs(h(i, j) * h(0, 0) - h(i, 0) * h(0, j)) <= 1e-10);
    }
    SUBCASE("mean distortion grows with the mutual-coupling strength")
    {
        double mean_d[3] = {0, 0, 0};
        const double rhos[3] = {0.0, 0.05, 0.1};
        for (std::uint64_t s = 0; s < 100; ++s) {
            const CMat clean =
                build_impaired_mimo_channel(arrays, cfg, paths, 0, 0, 0, 0, 0, 0, s);
            for (int r = 0; r < 3; ++r) {
                const CMat h = build_impaired_mimo_channel(arrays, cfg, paths, rhos[r], 0,
                                                           0, 0, 0, 0, s);
                double d = 0.0;
                for (std::size_t q = 0; q < h.data.size(); ++q)
                    d += std::norm(h.data[q] - clean.data[q]);
                mean_d[r] += std::sqrt(d);
            }
        }
        CHECK(mean_d[0] == doctest::Approx(0.0));
        CHECK(mean_d[1] > mean_d[0]);
        CHECK(mean_d[2] > mean_d[1]);
    }
    SUBCASE("coupling outside [0, 1) is rejected")
    {
        CHECK_THROWS_AS(build_impaired_mimo_channel(arrays, cfg, paths, 1.0, 0, 0, 0, 0, 0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("apply_pa: identity, pure AM-AM compression, and a one-sample memory tap")
{
    waveform::SampleStream s;
    s.fs = 1e6;
    for (int i = 0; i < 64; ++i)
        s.x.push_back(std::polar(1.7, 0.37 * i)); // constant envelope, amplitude 1.7

    SUBCASE("unit linear coefficient passes the stream through bit-identically")
    {
        MpPaModel id;
        id.max_order = 1;
        id.memory = 0;
        id.coeffs = CMat(1, 1, cplx{1.0, 0.0});
        const auto out = apply_pa(s, id);
        CHECK(out.x == s.x);
    }
    SUBCASE("third-order term scales a constant envelope by |1 + a3 A^2|")
    {
        MpPaModel pa;
        pa.max_order = 3;
        pa.memory = 0;
        pa.coeffs = CMat(2, 1);
        pa.coeffs(0, 0) = cplx{1.0, 0.0};
        pa.coeffs(1, 0) = cplx{-0.1, 0.0};
        const auto out = apply_pa(s, pa);
        const double want = std::abs(1.0 - 0.1 * 1.7 * 1.7) * 1.7;
        for (const auto& v : out.x)
            CHECK(std::abs(v) == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("a lone one-tap memory coefficient delays the stream")
    {
        MpPaModel mem;
        mem.max_order = 1;
        mem.memory = 1;
        mem.coeffs = CMat(1, 2);
        mem.coeffs(0, 1) = cplx{1.0, 0.0};
        const auto out = apply_pa(s, mem);
        CHECK(out.x[0] == cplx{0.0, 0.0});
        for (std::size_t i = 1; i < out.x.size(); ++i)
            CHECK(out.x[i] == s.x[i - 1]);
    }
    SUBCASE("even orders are rejected")
    {
        MpPaModel bad;
        bad.max_order = 2;
        bad.memory = 0;
        bad.coeffs = CMat(1, 1, cplx{1.0, 0.0});
        CHECK_THROWS_AS(apply_pa(s, bad), std::invalid_argument);
    }
}
