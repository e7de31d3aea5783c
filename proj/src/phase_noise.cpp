#include "isac/phase_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isac/rng.hpp"

namespace isac::pn {

void PnModel::validate() const
{
    if (!(bw3db >= 0))
        throw std::invalid_argument("pn_model.bw3db_hz: must be >= 0");
    if (kind == Kind::pll && !(loop_bw > 0))
        throw std::invalid_argument("pn_model.loop_bw_hz: must be > 0 for pll");
}

long cp_samples(const FrameConfig& cfg)
{
    return std::lround(cfg.cp_duration * cfg.sample_rate());
}

long symbol_samples(const FrameConfig& cfg) { return cp_samples(cfg) + cfg.n_subcarriers; }

std::vector<double> sample_pn_path(const PnModel& model, double fs, std::size_t n,
                                   std::uint64_t seed)
{
    model.validate();
    std::vector<double> phi(n, 0.0);
    if (n == 0)
        return phi;
    Rng rng = make_rng(substream(seed, 0x0511a70));
    std::normal_distribution<double> g(0.0, 1.0);
    const double sig_u = std::sqrt(4.0 * kPi * model.bw3db / fs);
    if (model.kind == PnModel::Kind::free_running) {
        double acc = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            acc += sig_u * g(rng);
            phi[i] = acc;
        }
    } else {
        const double rho = std::exp(-2.0 * kPi * model.loop_bw / fs);
        const double sig_st = sig_u / std::sqrt(1.0 - rho * rho);
        phi[0] = sig_st * g(rng);
        for (std::size_t i = 1; i < n; ++i)
            phi[i] = rho * phi[i - 1] + sig_u * g(rng);
    }
    return phi;
}

std::vector<PnGrid> self_referenced_pn_multi(const PnModel& model,
                                             const std::vector<double>& taus,
                                             const FrameConfig& cfg, std::uint64_t seed)
{
    model.validate();
    cfg.validate();
    for (double tau : taus)
        if (tau < 0)
            throw std::invalid_argument("self_referenced_pn: negative delay");

    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const double fs = cfg.sample_rate();
    const std::size_t cells = std::size_t(n) * m;
    std::vector<PnGrid> out(taus.size());

    if (model.kind == PnModel::Kind::pll) {
        long k_max = 0;
        for (double tau : taus)
            k_max = std::max(k_max, std::lround(tau * fs));
        const long top = cell_index(cfg, n - 1, m - 1);
        std::vector<double> phi = sample_pn_path(model, fs, std::size_t(top + k_max + 1), seed);
        for (std::size_t ti = 0; ti < taus.size(); ++ti) {
            const long k_tau = std::lround(taus[ti] * fs);
            PnGrid g{RMat(n, m), CMat(n, m)};
            for (int j = 0; j < m; ++j)
                for (int l = 0; l < n; ++l) {
                    const long idx = cell_index(cfg, l, j) + k_tau;
                    const double xi = phi[idx] - phi[idx - k_tau];
                    g.xi(l, j) = xi;
                    g.w(l, j) = std::polar(1.0, xi);
                }
            out[ti] = std::move(g);
        }
        return out;
    }

    // Free-running: one exact Wiener realization over the union of all
    // sampling instants (cell times and their delayed copies).
    std::vector<double> times;
    times.reserve(cells * (taus.size() + 1));
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l) {
            const double t = double(cell_index(cfg, l, j)) / fs;
            times.push_back(t);
            for (double tau : taus)
                times.push_back(t - tau);
        }
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    Rng rng = make_rng(substream(seed, 0x0511a70));
    std::normal_distribution<double> g(0.0, 1.0);
    const double rate = 4.0 * kPi * model.bw3db;
    std::vector<double> phi(times.size());
    double prev_t = times[order[0]];
    double acc = 0.0;
    phi[order[0]] = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const double t = times[order[i]];
        acc += std::sqrt(rate * (t - prev_t)) * g(rng);
        phi[order[i]] = acc;
        prev_t = t;
    }

    const std::size_t stride = taus.size() + 1;
    for (std::size_t ti = 0; ti < taus.size(); ++ti)
        out[ti] = PnGrid{RMat(n, m), CMat(n, m)};
    std::size_t pos = 0;
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l, pos += stride)
            for (std::size_t ti = 0; ti < taus.size(); ++ti) {
                const double xi = phi[pos] - phi[pos + 1 + ti];
                out[ti].xi(l, j) = xi;
                out[ti].w(l, j) = std::polar(1.0, xi);
            }
    return out;
}

PnGrid self_referenced_pn(const PnModel& model, double tau, const FrameConfig& cfg,
                          std::uint64_t seed)
{
    return self_referenced_pn_multi(model, {tau}, cfg, seed)[0];
}

double pn_cov_at_lag(const PnModel& model, double tau, const FrameConfig& cfg, long k)
{
    const double fs = cfg.sample_rate();
    if (model.kind == PnModel::Kind::free_running) {
        const double dt = std::fabs(double(k)) / fs;
        return 4.0 * kPi * model.bw3db * std::max(0.0, tau - dt);
    }
    const double rho = std::exp(-2.0 * kPi * model.loop_bw / fs);
    const double var_st = (4.0 * kPi * model.bw3db / fs) / (1.0 - rho * rho);
    const long k_tau = std::lround(tau * fs);
    auto r = [&](long j) { return var_st * std::pow(rho, double(std::labs(j))); };
    return 2.0 * r(k) - r(k + k_tau) - r(k - k_tau);
}

RMat analytic_pn_covariance(const PnModel& model, double tau, const FrameConfig& cfg)
{
    model.validate();
    cfg.validate();
    if (tau < 0)
        throw std::invalid_argument("analytic_pn_covariance: negative delay");
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const long n_sym = symbol_samples(cfg);
    const std::size_t dim = std::size_t(n) * m;

    // One value per index lag; the matrix only reads these.
    const long span = (m - 1) * n_sym + (n - 1);
    std::vector<double> by_lag(2 * span + 1);
    for (long k = -span; k <= span; ++k)
        by_lag[std::size_t(k + span)] = pn_cov_at_lag(model, tau, cfg, k);

    const double c0 = by_lag[std::size_t(span)];
    for (double v : by_lag)
        if (!(c0 >= std::fabs(v) - 1e-12 * std::fabs(c0)))
            throw std::logic_error("analytic_pn_covariance: assembled values not PSD-consistent");

    RMat cov(dim, dim);
    for (std::size_t a = 0; a < dim; ++a) {
        const long ia = long(a / n) * n_sym + long(a % n);
        for (std::size_t b = 0; b < dim; ++b) {
            const long ib = long(b / n) * n_sym + long(b % n);
            cov(a, b) = by_lag[std::size_t(ia - ib + span)];
        }
    }
    return cov;
}

} // namespace isac::pn
