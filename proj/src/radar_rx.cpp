#include "isac/radar_rx.hpp"

#include <algorithm>
#include <cmath>

#include "isac/fft.hpp"
#include "isac/special.hpp"
#include "isac/steering.hpp"

namespace isac::rx {

namespace {

void check_grids(const CMat& y, const CMat& x, const RMat& p, const FrameConfig& cfg)
{
    cfg.validate();
    const auto n = std::size_t(cfg.n_subcarriers);
    const auto m = std::size_t(cfg.n_symbols);
    if (y.rows != n || y.cols != m || x.rows != n || x.cols != m || p.rows != n ||
        p.cols != m)
        throw std::invalid_argument("grid shapes do not match frame");
}

/// Demodulated matched grid G = (F_N y) .* sqrt(P) .* conj(X).
CMat matched_grid(const CMat& y, const CMat& x, const RMat& p, const FrameConfig& cfg)
{
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    CMat g(n, m);
    const double scale = 1.0 / std::sqrt(double(n));
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j) {
        std::vector<cplx> col(n);
        for (int l = 0; l < n; ++l)
            col[l] = y(l, j);
        fft::forward(col);
        for (int k = 0; k < n; ++k)
            g(k, j) = col[k] * scale * std::sqrt(p(k, j)) * std::conj(x(k, j));
    }
    return g;
}

RangeDopplerMap map_from_grid(const CMat& g, const RMat& p, const FrameConfig& cfg,
                              int pad_n, int pad_m)
{
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const int nr = pad_n * n;
    const int mv = pad_m * m;

    CMat stage(nr, m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j) {
        std::vector<cplx> col(nr, cplx{0, 0});
        for (int k = 0; k < n; ++k)
            col[k] = g(k, j);
        fft::backward(col);
        for (int r = 0; r < nr; ++r)
            stage(r, j) = col[r];
    }

    RangeDopplerMap out;
    out.cfg = cfg;
    out.pad_n = pad_n;
    out.pad_m = pad_m;
    out.sum_power = 0;
    for (double v : p.data)
        out.sum_power += v;
    out.z = CMat(nr, mv);
    const double scale = 1.0 / std::sqrt(double(n));
#pragma omp parallel for schedule(static)
    for (int r = 0; r < nr; ++r) {
        std::vector<cplx> row(mv, cplx{0, 0});
        for (int j = 0; j < m; ++j)
            row[j] = stage(r, j);
        fft::forward(row);
        for (int c = 0; c < mv; ++c) {
            const int b = c - mv / 2;
            out.z(r, c) = row[(b % mv + mv) % mv] * scale;
        }
    }
    return out;
}

struct Peak {
    int r = 0, c = 0;
    double mag = 0;
};

Peak global_peak(const CMat& z)
{
    Peak p;
    for (std::size_t r = 0; r < z.rows; ++r)
        for (std::size_t c = 0; c < z.cols; ++c) {
            const double m = std::abs(z(r, c));
            if (m > p.mag) {
                p = {int(r), int(c), m};
            }
        }
    return p;
}

/// Parabolic vertex offset from three magnitudes, clamped to [-0.5, 0.5].
double parabolic(double ym, double y0, double yp)
{
    const double den = ym - 2.0 * y0 + yp;
    if (den >= 0.0)
        return 0.0;  // no local curvature, stay on the bin
    return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

/// Time-domain echo template D(cfo) F^H (sqrt(P) .* X .* b(tau) c(nu)^T).
CMat echo_template(const CMat& x, const RMat& p, const FrameConfig& cfg, double tau,
                   double nu, double cfo)
{
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const auto b = freq_steering(tau, n, cfg.subcarrier_spacing);
    const auto c = time_steering(nu, m, cfg.symbol_duration());
    CMat s(n, m);
    const double scale = 1.0 / std::sqrt(double(n));
    std::vector<cplx> col(n);
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < n; ++k)
            col[k] = std::sqrt(p(k, j)) * x(k, j) * b[k] * c[j];
        fft::backward(col);
        for (int l = 0; l < n; ++l)
            s(l, j) = col[l] * scale;
    }
    if (cfo != 0) {
        const auto d = cfo_phase(cfo, n, cfg.elem_duration());
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < m; ++j)
                s(l, j) *= d[l];
    }
    return s;
}

} // namespace

RangeDopplerMap range_doppler_map(const CMat& y, const CMat& x, const RMat& p,
                                  const FrameConfig& cfg, int pad_n, int pad_m)
{
    check_grids(y, x, p, cfg);
    if (pad_n < 1 || pad_m < 1)
        throw std::invalid_argument("range_doppler_map: pad factors must be >= 1");
    return map_from_grid(matched_grid(y, x, p, cfg), p, cfg, pad_n, pad_m);
}

std::vector<double> range_profile_db(const RangeDopplerMap& map)
{
    std::vector<double> prof(map.z.rows, 0.0);
    double peak = 0.0;
    for (std::size_t r = 0; r < map.z.rows; ++r) {
        double best = 0.0;
        for (std::size_t c = 0; c < map.z.cols; ++c)
            best = std::max(best, std::abs(map.z(r, c)));
        prof[r] = best;
        peak = std::max(peak, best);
    }
    if (peak == 0.0)
        throw std::invalid_argument("range_profile_db: all-zero map");
    for (auto& v : prof)
        v = mag_db(std::max(v, 1e-300) / peak);
    return prof;
}

DetectionReport glrt_detect(const std::vector<RangeDopplerMap>& maps, double noise_var,
                            double pfa)
{
    if (maps.empty())
        throw std::invalid_argument("glrt_detect: no maps");
    if (!(noise_var > 0))
        throw std::invalid_argument("glrt_detect: noise variance must be > 0");
    if (!(pfa > 0) || !(pfa < 1))
        throw std::invalid_argument("glrt_detect: pfa must be in (0, 1)");
    const auto& m0 = maps[0];
    for (const auto& m : maps)
        if (m.z.rows != m0.z.rows || m.z.cols != m0.z.cols)
            throw std::invalid_argument("glrt_detect: inconsistent map shapes");

    const double cell_var = m0.cell_noise_var(noise_var);
    const std::size_t cells = m0.z.rows * m0.z.cols;
    const double p_cell = -std::expm1(std::log1p(-pfa) / double(cells));
    const double thr = special::detection_threshold(int(maps.size()), p_cell);

    RMat t(m0.z.rows, m0.z.cols);
    for (const auto& m : maps)
        for (std::size_t i = 0; i < t.data.size(); ++i)
            t.data[i] += std::norm(m.z.data[i]) / cell_var;

    std::vector<std::pair<double, std::size_t>> hits;
    for (std::size_t i = 0; i < t.data.size(); ++i)
        if (t.data[i] >= thr)
            hits.emplace_back(t.data[i], i);
    std::sort(hits.rbegin(), hits.rend());

    DetectionReport rep;
    rep.threshold = thr;
    rep.pfa = pfa;
    for (const auto& [stat, idx] : hits) {
        const int r = int(idx / m0.z.cols);
        const int c = int(idx % m0.z.cols);
        bool owned = false;
        for (const auto& d : rep.detections)
            if (std::abs(d.range_bin - r) <= 1 && std::abs(d.doppler_bin - c) <= 1)
                owned = true;
        if (owned)
            continue;
        Detection d;
        d.range_bin = r;
        d.doppler_bin = c;
        d.range = m0.range_at(r);
        d.velocity = m0.velocity_at(c);
        d.statistic = stat;
        d.amplitude = m0.z(r, c) * std::sqrt(double(m0.cfg.n_subcarriers)) / m0.sum_power;
        rep.detections.push_back(d);
    }
    return rep;
}

DetectionReport extract_targets(const CMat& y, const CMat& x, const RMat& p,
                                const FrameConfig& cfg, const ExtractOptions& opt)
{
    check_grids(y, x, p, cfg);
    if (opt.k_max < 1)
        throw std::invalid_argument("extract_targets: k_max must be >= 1");
    if (opt.cfo_grid.empty())
        throw std::invalid_argument("extract_targets: empty candidate grid");

    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const double lambda = cfg.wavelength();
    CMat residual = y;
    const double e0 = sq_norm(residual);

    DetectionReport rep;
    rep.pfa = 0;
    rep.threshold = opt.residual_threshold;

    for (int it = 0; it < opt.k_max; ++it) {
        if (e0 == 0.0 || sq_norm(residual) <= opt.residual_threshold * e0)
            break;

        double best_mag = -1.0;
        double best_cfo = 0.0;
        Peak best_pk;
        RangeDopplerMap best_map;
        for (double cand : opt.cfo_grid) {
            CMat comp = residual;
            if (cand != 0) {
                const auto d = cfo_phase(cand, n, cfg.elem_duration());
                for (int l = 0; l < n; ++l)
                    for (int j = 0; j < m; ++j)
                        comp(l, j) *= std::conj(d[l]);
            }
            RangeDopplerMap map = range_doppler_map(comp, x, p, cfg, opt.pad_n, opt.pad_m);
            const Peak pk = global_peak(map.z);
            if (pk.mag > best_mag) {
                best_mag = pk.mag;
                best_cfo = cand;
                best_pk = pk;
                best_map = std::move(map);
            }
        }
        if (best_mag <= 0.0)
            break;

        const auto& z = best_map.z;
        const int nr = int(z.rows), mv = int(z.cols);
        const int r = best_pk.r, c = best_pk.c;
        double dr = 0.0, dc = 0.0;
        if (r > 0 && r + 1 < nr)
            dr = parabolic(std::abs(z(r - 1, c)), best_pk.mag, std::abs(z(r + 1, c)));
        if (c > 0 && c + 1 < mv)
            dc = parabolic(std::abs(z(r, c - 1)), best_pk.mag, std::abs(z(r, c + 1)));

        const double tau = (double(r) + dr) / (double(nr) * cfg.subcarrier_spacing);
        const double nu = (double(c) + dc - double(mv / 2)) /
                          (double(mv) * cfg.symbol_duration());

        const CMat s = echo_template(x, p, cfg, tau, nu, best_cfo);
        cplx num{0, 0};
        double den = 0.0;
        for (std::size_t q = 0; q < s.data.size(); ++q) {
            num += std::conj(s.data[q]) * residual.data[q];
            den += std::norm(s.data[q]);
        }
        if (den == 0.0)
            break;
        const cplx alpha = num / den;
        for (std::size_t q = 0; q < s.data.size(); ++q)
            residual.data[q] -= alpha * s.data[q];

        double mean_pow = 0.0;
        for (const auto& v : z.data)
            mean_pow += std::norm(v);
        mean_pow /= double(z.data.size());

        Detection d;
        d.range = tau * kSpeedOfLight / 2.0;
        d.velocity = nu * lambda / 2.0;
        d.amplitude = alpha;
        d.statistic = best_pk.mag * best_pk.mag / mean_pow;
        d.range_bin = r;
        d.doppler_bin = c;
        rep.detections.push_back(d);
    }

    std::sort(rep.detections.begin(), rep.detections.end(),
              [](const Detection& a, const Detection& b) {
                  return std::abs(a.amplitude) > std::abs(b.amplitude);
              });
    return rep;
}

DetectionReport iterative_target_extraction(const CMat& y, const CMat& x, const RMat& p,
                                            const FrameConfig& cfg, int k_max,
                                            double residual_threshold)
{
    ExtractOptions opt;
    opt.k_max = k_max;
    opt.residual_threshold = residual_threshold;
    return extract_targets(y, x, p, cfg, opt);
}

void estimate_angles(DetectionReport& report, const std::vector<RangeDopplerMap>& maps,
                     const ArrayConfig& arrays, int pad)
{
    if (maps.size() < 2)
        throw std::invalid_argument("estimate_angles: need at least two antennas");
    if (int(maps.size()) != arrays.n_rx)
        throw std::invalid_argument("estimate_angles: map count != n_rx");
    const int u_pad = std::max(pad, int(maps.size()));
    const double lambda = arrays.wavelength();

    for (auto& det : report.detections) {
        std::vector<cplx> spec(u_pad, cplx{0, 0});
        for (std::size_t i = 0; i < maps.size(); ++i)
            spec[i] = maps[i].z(det.range_bin, det.doppler_bin);
        fft::forward(spec);
        int best = 0;
        double best_mag = -1.0;
        std::vector<double> mag(u_pad);
        for (int u = 0; u < u_pad; ++u) {
            mag[u] = std::abs(spec[u]);
            if (mag[u] > best_mag) {
                best_mag = mag[u];
                best = u;
            }
        }
        const double ym = mag[(best - 1 + u_pad) % u_pad];
        const double yp = mag[(best + 1) % u_pad];
        const double delta = parabolic(ym, best_mag, yp);
        double f = (double(best) + delta) / double(u_pad);
        if (f > 0.5)
            f -= 1.0;
        const double s = std::clamp(f * lambda / arrays.element_spacing, -1.0, 1.0);
        det.angle = std::asin(s);
    }
}

double theoretical_pd(double gamma, double pfa)
{
    if (gamma < 0)
        throw std::invalid_argument("theoretical_pd: gamma must be >= 0");
    if (!(pfa > 0) || !(pfa < 1))
        throw std::invalid_argument("theoretical_pd: pfa must be in (0, 1)");
    return special::marcum_q1(std::sqrt(2.0 * gamma), std::sqrt(-2.0 * std::log(pfa)));
}

SyncEstimate estimate_cfo_clock(const CMat& y, const CMat& x, const RMat& p,
                                const FrameConfig& cfg, const Mat<unsigned char>& pilots)
{
    check_grids(y, x, p, cfg);
    if (pilots.rows != x.rows || pilots.cols != x.cols)
        throw std::invalid_argument("pilots: mask shape mismatch");
    std::size_t n_pilot = 0;
    for (auto v : pilots.data)
        n_pilot += v ? 1 : 0;
    if (cfg.n_subcarriers < 2 || n_pilot < 2)
        throw std::invalid_argument("pilots: need at least two pilot-bearing fast-time cells");

    // Pilot-masked grids: unknown payload cells contribute nothing.
    CMat xp = x;
    RMat pp = p;
    for (std::size_t i = 0; i < pilots.data.size(); ++i)
        if (!pilots.data[i]) {
            xp.data[i] = 0;
            pp.data[i] = 0;
        }

    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    CMat g = matched_grid(y, xp, pp, cfg);
    RangeDopplerMap map = map_from_grid(g, pp, cfg, 4, 4);
    const Peak pk = global_peak(map.z);
    const int nr = int(map.z.rows), mv = int(map.z.cols);
    double dr = 0.0, dc = 0.0;
    if (pk.r > 0 && pk.r + 1 < nr)
        dr = parabolic(std::abs(map.z(pk.r - 1, pk.c)), pk.mag,
                       std::abs(map.z(pk.r + 1, pk.c)));
    if (pk.c > 0 && pk.c + 1 < mv)
        dc = parabolic(std::abs(map.z(pk.r, pk.c - 1)), pk.mag,
                       std::abs(map.z(pk.r, pk.c + 1)));
    const double tau = (double(pk.r) + dr) / (double(nr) * cfg.subcarrier_spacing);
    const double nu = (double(pk.c) + dc - double(mv / 2)) /
                      (double(mv) * cfg.symbol_duration());

    const CMat s = echo_template(xp, pp, cfg, tau, nu, 0.0);
    std::vector<cplx> rrow(n, cplx{0, 0});
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < m; ++j)
            rrow[l] += y(l, j) * std::conj(s(l, j));

    // Weighted LS fit of the unwrapped fast-time phase ramp.
    double sw = 0, swl = 0, swll = 0, swp = 0, swlp = 0;
    double phase = std::arg(rrow[0]);
    double prev = phase;
    for (int l = 0; l < n; ++l) {
        if (l > 0) {
            phase = prev + std::arg(rrow[l] * std::conj(rrow[l - 1]));
            prev = phase;
        }
        const double w = std::norm(rrow[l]);
        sw += w;
        swl += w * l;
        swll += w * double(l) * l;
        swp += w * phase;
        swlp += w * double(l) * phase;
    }
    const double den = sw * swll - swl * swl;
    SyncEstimate est;
    est.delay = tau;
    est.doppler = nu;
    if (den > 0) {
        const double slope = (sw * swlp - swl * swp) / den;
        est.cfo = slope * double(n) / (2.0 * kPi * cfg.elem_duration());
    }
    return est;
}

} // namespace isac::rx
