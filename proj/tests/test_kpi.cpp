// Estimation bounds, resolutions, link rate and assignment rewards.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include <isac/common.hpp>
#include <isac/kpi.hpp>
#include <isac/rng.hpp>
#include <isac/types.hpp>

using namespace isac;

namespace {

FrameConfig frame(int n, int m, double scs)
{
    FrameConfig cfg;
    cfg.n_subcarriers = n;
    cfg.n_symbols = m;
    cfg.subcarrier_spacing = scs;
    cfg.cp_duration = 0.25 / scs;
    cfg.carrier_freq = 28e9;
    cfg.total_power = double(n) * m;
    return cfg;
}

ArrayConfig rx_array(int n_rx, double carrier = 28e9)
{
    ArrayConfig a;
    a.n_tx = 1;
    a.n_rx = n_rx;
    a.n_comm = 1;
    a.carrier_freq = carrier;
    a.element_spacing = a.wavelength() / 2.0;
    return a;
}

} // namespace

TEST_CASE("crb_bounds: frozen range bound and scaling laws")
{
    const FrameConfig cfg = frame(1024, 16, 60e3);
    const ArrayConfig arrays = rx_array(4);
    const auto b = kpi::crb_bounds(1.0, cfg, arrays, 0.0);
    // 3 c^2 / (8 pi^2 b^2) with b = scs sqrt(N^2-1), evaluated once and pinned.
    CHECK(b.range == doctest::Approx(0.9058828378007455).epsilon(1e-12));

    SUBCASE("doubling the occupied band cuts the range bound fourfold")
    {
        const auto wide = kpi::crb_bounds(1.0, frame(1024, 16, 120e3), arrays, 0.0);
        CHECK(wide.range == doctest::Approx(b.range / 4.0).epsilon(1e-12));
    }
    SUBCASE("bounds strictly tighten with post-processing gain")
    {
        double prev = std::numeric_limits<double>::infinity();
        for (double g : {0.5, 1.0, 2.0, 8.0, 64.0}) {
            const auto cur = kpi::crb_bounds(g, cfg, arrays, 0.3);
            CHECK(cur.range < prev);
            CHECK(cur.range * g == doctest::Approx(b.range).epsilon(1e-12));
            prev = cur.range;
        }
    }
    SUBCASE("single receive antenna cannot bound the angle")
    {
        const auto single = kpi::crb_bounds(1.0, cfg, rx_array(1), 0.0);
        CHECK(std::isinf(single.angle));
        CHECK(std::isfinite(single.range));
    }
    SUBCASE("angle bound inflates away from broadside")
    {
        const auto a0 = kpi::crb_bounds(1.0, cfg, arrays, 0.0);
        const auto a1 = kpi::crb_bounds(1.0, cfg, arrays, 1.0);
        CHECK(a1.angle == doctest::Approx(a0.angle / std::pow(std::cos(1.0), 2))
                              .epsilon(1e-12));
    }
    SUBCASE("domain errors")
    {
        CHECK_THROWS_AS(kpi::crb_bounds(0.0, cfg, arrays, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(kpi::crb_bounds(-1.0, cfg, arrays, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(kpi::crb_bounds(1.0, cfg, arrays, 1.6), std::invalid_argument);
    }
}

TEST_CASE("resolutions: desk formulas with the root-mean-square apertures")
{
    SUBCASE("a 100 MHz comb resolves 1.5 m")
    {
        const FrameConfig cfg = frame(512, 16, 1e8 / std::sqrt(512.0 * 512.0 - 1.0));
        const auto r = kpi::resolutions(cfg, rx_array(4));
        CHECK(r.range == doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("doubling the dwell halves the velocity cell")
    {
        const auto r1 = kpi::resolutions(frame(256, 512, 120e3), rx_array(4));
        const auto r2 = kpi::resolutions(frame(256, 1024, 120e3), rx_array(4));
        CHECK(r1.velocity / r2.velocity == doctest::Approx(2.0).epsilon(1e-5));
    }
    SUBCASE("two half-wave elements: frozen beamwidth")
    {
        const auto r = kpi::resolutions(frame(64, 8, 120e3), rx_array(2));
        CHECK(r.angle == doctest::Approx(1.027683479157534).epsilon(1e-12));
    }
    SUBCASE("a single element has no angular resolution")
    {
        const auto r = kpi::resolutions(frame(64, 8, 120e3), rx_array(1));
        CHECK(std::isinf(r.angle));
    }
    SUBCASE("larger grids sharpen both cells and bounds")
    {
        const auto rs = kpi::resolutions(frame(128, 8, 120e3), rx_array(4));
        const auto rl = kpi::resolutions(frame(512, 8, 120e3), rx_array(4));
        CHECK(rl.range < rs.range);
        const auto bs = kpi::crb_bounds(1.0, frame(128, 8, 120e3), rx_array(4), 0.0);
        const auto bl = kpi::crb_bounds(1.0, frame(512, 8, 120e3), rx_array(4), 0.0);
        CHECK(bl.range < bs.range);
    }
}

TEST_CASE("achievable_rate: closed cells, a unit-SNR cell, and a dense oracle")
{
    SUBCASE("no power, no bits")
    {
        CMat h(4, 2, cplx{1.0, 0.0});
        RMat p(4, 2, 0.0);
        CHECK(kpi::achievable_rate(h, p, 1.0) == 0.0);
    }
    SUBCASE("one cell at unit SNR carries exactly one bit")
    {
        CMat h(1, 1, cplx{0.0, 2.0});
        RMat p(1, 1, 0.25);
        CHECK(kpi::achievable_rate(h, p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("random grid matches the double loop")
    {
        const int n = 16, m = 6;
        CMat h(n, m);
        Rng rng = make_rng(404);
        fill_noise(h, 1.0, rng);
        RMat p(n, m);
        for (auto& v : p.data)
            v = std::abs(randn_c(rng));
        const double noise = 0.7;
        double want = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < m; ++j)
                want += std::log2(1.0 + p(k, j) * std::norm(h(k, j)) / noise);
        CHECK(kpi::achievable_rate(h, p, noise) == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("domain errors")
    {
        CMat h(2, 2, cplx{1.0, 0.0});
        RMat p(2, 2, 1.0);
        RMat wrong(2, 1, 1.0);
        CHECK_THROWS_AS(kpi::achievable_rate(h, wrong, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(kpi::achievable_rate(h, p, 0.0), std::invalid_argument);
        RMat neg = p;
        neg(0, 1) = -0.5;
        CHECK_THROWS_AS(kpi::achievable_rate(h, neg, 1.0), std::invalid_argument);
    }
}

TEST_CASE("mi_reward: indicator-gated per-subcarrier splits")
{
    SUBCASE("half and half at unit gains")
    {
        const int n = 64;
        std::vector<kpi::Assign> w(n);
        for (int i = 0; i < n; ++i)
            w[i] = i < n / 2 ? kpi::Assign::sensing : kpi::Assign::comm;
        const std::vector<double> p(n, 1.0), q(n, 1.0);
        const auto r = kpi::mi_reward(w, p, q, q);
        CHECK(r.sensing == doctest::Approx(32.0).epsilon(1e-12));
        CHECK(r.comm == doctest::Approx(32.0).epsilon(1e-12));
    }
    SUBCASE("all sensing leaves the link empty")
    {
        const std::vector<kpi::Assign> w(8, kpi::Assign::sensing);
        const std::vector<double> p(8, 2.0), qs(8, 0.5), qc(8, 3.0);
        const auto r = kpi::mi_reward(w, p, qs, qc);
        CHECK(r.comm == 0.0);
        CHECK(r.sensing == doctest::Approx(8.0 * std::log2(2.0)).epsilon(1e-12));
    }
    SUBCASE("random assignment matches the brute-force sum")
    {
        const int n = 33;
        Rng rng = make_rng(505);
        std::vector<kpi::Assign> w(n);
        std::vector<double> p(n), qs(n), qc(n);
        for (int i = 0; i < n; ++i) {
            w[i] = (rng() & 1) ? kpi::Assign::sensing : kpi::Assign::comm;
            p[i] = std::abs(randn_c(rng));
            qs[i] = std::abs(randn_c(rng));
            qc[i] = std::abs(randn_c(rng));
        }
        kpi::MiReward want;
        for (int i = 0; i < n; ++i)
            (w[i] == kpi::Assign::sensing ? want.sensing : want.comm) +=
                std::log2(1.0 + (w[i] == kpi::Assign::sensing ? qs[i] : qc[i]) * p[i]);
        const auto r = kpi::mi_reward(w, p, qs, qc);
        CHECK(r.sensing == doctest::Approx(want.sensing).epsilon(1e-12));
        CHECK(r.comm == doctest::Approx(want.comm).epsilon(1e-12));
    }
    SUBCASE("length mismatch")
    {
        const std::vector<kpi::Assign> w(4, kpi::Assign::comm);
        const std::vector<double> p(4, 1.0), q3(3, 1.0), q4(4, 1.0);
        CHECK_THROWS_AS(kpi::mi_reward(w, p, q3, q4), std::invalid_argument);
    }
}

TEST_CASE("kpi json report round-trips its fields")
{
    kpi::KpiReport r;
    r.crb_range = 0.25;
    r.res_range = 1.5;
    r.pd = 0.93;
    r.rate = 120.5;
    r.mi_sensing = 10.0;
    r.mi_comm = 20.0;
    const auto j = nlohmann::json::parse(kpi::to_json(r));
    CHECK(j["crb_range_m2"].get<double>() == 0.25);
    CHECK(j["res_range_m"].get<double>() == 1.5);
    CHECK(j["pd"].get<double>() == 0.93);
    CHECK(j["rate_bits"].get<double>() == 120.5);
    CHECK(j["mi_sensing_bits"].get<double>() == 10.0);
    CHECK(j["mi_comm_bits"].get<double>() == 20.0);
}
