#include "isac/enhance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "isac/fft.hpp"
#include "isac/steering.hpp"

namespace isac::enh {

namespace {

using EMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>;

EMat to_eigen(const CMat& a)
{
    return Eigen::Map<const EMat>(a.data.data(), long(a.rows), long(a.cols));
}

CMat from_eigen(const EMat& e)
{
    CMat a(std::size_t(e.rows()), std::size_t(e.cols()));
    Eigen::Map<EMat>(a.data.data(), e.rows(), e.cols()) = e;
    return a;
}

/// Dominant-echo estimate from one matched map.
struct Dominant {
    double tau = 0;
    double nu = 0;
    cplx alpha{0, 0};
    int r = 0, c = 0;
    double mag = 0;
};

double parabolic(double ym, double y0, double yp)
{
    const double den = ym - 2.0 * y0 + yp;
    if (den >= 0.0)
        return 0.0;
    return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

CMat echo_template(const CMat& x, const RMat& p, const FrameConfig& cfg, double tau,
                   double nu)
{
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const auto b = freq_steering(tau, n, cfg.subcarrier_spacing);
    const auto c = time_steering(nu, m, cfg.symbol_duration());
    CMat s(n, m);
    std::vector<cplx> col(n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < n; ++k)
            col[k] = std::sqrt(p(k, j)) * x(k, j) * b[k] * c[j];
        fft::backward(col);
        for (int l = 0; l < n; ++l)
            s(l, j) = col[l] * scale;
    }
    return s;
}

Dominant dominant_echo(const CMat& y, const CMat& x, const RMat& p, const FrameConfig& cfg,
                       int pad_n, int pad_m)
{
    const rx::RangeDopplerMap map = rx::range_doppler_map(y, x, p, cfg, pad_n, pad_m);
    const auto& z = map.z;
    Dominant d;
    for (std::size_t r = 0; r < z.rows; ++r)
        for (std::size_t c = 0; c < z.cols; ++c) {
            const double m = std::abs(z(r, c));
            if (m > d.mag) {
                d.mag = m;
                d.r = int(r);
                d.c = int(c);
            }
        }
    const int nr = int(z.rows), mv = int(z.cols);
    double dr = 0.0, dc = 0.0;
    if (d.r > 0 && d.r + 1 < nr)
        dr = parabolic(std::abs(z(d.r - 1, d.c)), d.mag, std::abs(z(d.r + 1, d.c)));
    if (d.c > 0 && d.c + 1 < mv)
        dc = parabolic(std::abs(z(d.r, d.c - 1)), d.mag, std::abs(z(d.r, d.c + 1)));
    d.tau = (double(d.r) + dr) / (double(nr) * cfg.subcarrier_spacing);
    d.nu = (double(d.c) + dc - double(mv / 2)) / (double(mv) * cfg.symbol_duration());

    const CMat s = echo_template(x, p, cfg, d.tau, d.nu);
    cplx num{0, 0};
    double den = 0.0;
    for (std::size_t q = 0; q < s.data.size(); ++q) {
        num += std::conj(s.data[q]) * y.data[q];
        den += std::norm(s.data[q]);
    }
    d.alpha = den > 0 ? num / den : cplx{0, 0};
    return d;
}

/// Banded SPD Cholesky: band(i, k) holds A(i, i-k), k = 0..bw.
void band_cholesky(RMat& band)
{
    const int n = int(band.rows);
    const int bw = int(band.cols) - 1;
    for (int i = 0; i < n; ++i) {
        for (int k = std::min(bw, i); k >= 0; --k) {
            const int j = i - k;
            double s = band(i, k);
            const int lo = std::max(0, i - bw);
            for (int t = lo; t < j; ++t) {
                const int ki = i - t, kj = j - t;
                if (ki <= bw && kj <= bw)
                    s -= band(i, ki) * band(j, kj);
            }
            if (k == 0) {
                if (s <= 0)
                    throw std::logic_error("band_cholesky: matrix not positive definite");
                band(i, 0) = std::sqrt(s);
            } else {
                band(i, k) = s / band(j, 0);
            }
        }
    }
}

void band_solve(const RMat& chol, std::vector<double>& rhs)
{
    const int n = int(chol.rows);
    const int bw = int(chol.cols) - 1;
    for (int i = 0; i < n; ++i) {
        double s = rhs[i];
        for (int k = 1; k <= std::min(bw, i); ++k)
            s -= chol(i, k) * rhs[i - k];
        rhs[i] = s / chol(i, 0);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int k = 1; k <= bw && i + k < n; ++k)
            s -= chol(i + k, k) * rhs[i + k];
        rhs[i] = s / chol(i, 0);
    }
}

} // namespace

rx::DetectionReport ici_joint_estimate(const CMat& y, const CMat& x, const RMat& p,
                                       const FrameConfig& cfg,
                                       const std::vector<double>& doppler_grid,
                                       int k_max, double residual_threshold)
{
    rx::ExtractOptions opt;
    opt.k_max = k_max;
    opt.residual_threshold = residual_threshold;
    opt.cfo_grid = doppler_grid;
    return rx::extract_targets(y, x, p, cfg, opt);
}

PnCompensateResult pn_compensate(const CMat& y, const CMat& x, const RMat& p,
                                 const FrameConfig& cfg, const pn::PnModel& model,
                                 int n_iters)
{
    model.validate();
    cfg.validate();
    if (n_iters < 1)
        throw std::invalid_argument("pn_compensate: n_iters must be >= 1");
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const double fs = cfg.sample_rate();

    PnCompensateResult res;
    res.y_comp = y;
    res.xi = RMat(n, m);

    for (int iter = 0; iter < n_iters; ++iter) {
        const Dominant dom = dominant_echo(res.y_comp, x, p, cfg, 4, 4);
        res.dominant.range = dom.tau * kSpeedOfLight / 2.0;
        res.dominant.velocity = dom.nu * cfg.wavelength() / 2.0;
        res.dominant.amplitude = dom.alpha;
        res.dominant.range_bin = dom.r;
        res.dominant.doppler_bin = dom.c;
        res.dominant.statistic = dom.mag;
        if (dom.alpha == cplx{0, 0})
            break;

        CMat a = echo_template(x, p, cfg, dom.tau, dom.nu);
        for (auto& v : a.data)
            v *= dom.alpha;

        // Observation noise proxy: residual power around the dominant echo.
        double sig2 = 0.0;
        for (std::size_t qq = 0; qq < a.data.size(); ++qq)
            sig2 += std::norm(res.y_comp.data[qq] - a.data[qq]);
        sig2 /= double(a.data.size());

        // In-symbol prior band: covariance support at this delay.
        const double c0 = pn::pn_cov_at_lag(model, dom.tau, cfg, 0);
        if (c0 <= 0)
            break;
        int bw = 0;
        for (int k = 1; k < n; ++k) {
            if (std::fabs(pn::pn_cov_at_lag(model, dom.tau, cfg, k)) > 1e-12 * c0)
                bw = k;
        }
        bw = std::min(bw, n - 1);
        std::vector<double> cov(bw + 1);
        for (int k = 0; k <= bw; ++k)
            cov[k] = pn::pn_cov_at_lag(model, dom.tau, cfg, k);
        const double eps = 1e-10 * c0 + 1e-300;
        (void)fs;

        RMat xi_step(n, m);
        for (int j = 0; j < m; ++j) {
            std::vector<double> obs(n), noise_var(n);
            for (int l = 0; l < n; ++l) {
                const cplx av = a(l, j);
                const double pw = std::norm(av);
                const cplx ratio = pw > 0 ? res.y_comp(l, j) / av : cplx{1, 0};
                obs[l] = std::arg(ratio);
                noise_var[l] = pw > 0 ? std::min(sig2 / (2.0 * pw), 1e6 * c0) : 1e6 * c0;
            }
            RMat band(n, bw + 1);
            for (int l = 0; l < n; ++l) {
                band(l, 0) = cov[0] + noise_var[l] + eps;
                for (int k = 1; k <= std::min(bw, l); ++k)
                    band(l, k) = cov[k];
            }
            band_cholesky(band);
            std::vector<double> u = obs;
            band_solve(band, u);
            for (int l = 0; l < n; ++l) {
                double v = 0.0;
                for (int k = -bw; k <= bw; ++k) {
                    const int t = l + k;
                    if (t >= 0 && t < n)
                        v += cov[std::abs(k)] * u[t];
                }
                xi_step(l, j) = v;
            }
        }

        for (int j = 0; j < m; ++j)
            for (int l = 0; l < n; ++l) {
                res.xi(l, j) += xi_step(l, j);
                res.y_comp(l, j) = y(l, j) * std::polar(1.0, -res.xi(l, j));
            }
    }
    return res;
}

VelocityDisambigResult ici_velocity_disambiguate(const CMat& y, const CMat& x,
                                                 const RMat& p, const FrameConfig& cfg,
                                                 double coarse_v, int span,
                                                 int pad_n, int pad_m)
{
    cfg.validate();
    if (span < 0)
        throw std::invalid_argument("ici_velocity_disambiguate: span must be >= 0");
    const double lambda = cfg.wavelength();
    const double v_amb = lambda / (2.0 * cfg.symbol_duration());
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;

    VelocityDisambigResult res;
    double best = -1.0;
    for (int q = -span; q <= span; ++q) {
        const double v = coarse_v + q * v_amb;
        const double nu = 2.0 * v / lambda;
        CMat comp = y;
        const auto d = cfo_phase(nu, n, cfg.elem_duration());
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < m; ++j)
                comp(l, j) *= std::conj(d[l]);
        const rx::RangeDopplerMap map = rx::range_doppler_map(comp, x, p, cfg, pad_n, pad_m);
        double mag = 0.0;
        for (const auto& zv : map.z.data)
            mag = std::max(mag, std::abs(zv));
        res.peak_mags.push_back(mag);
        if (mag > best) {
            best = mag;
            res.q = q;
            res.velocity = v;
        }
    }
    return res;
}

RangeDisambigResult pn_range_disambiguate(const CMat& y, const CMat& x, const RMat& p,
                                          const FrameConfig& cfg, const pn::PnModel& model,
                                          channel::SensingMode mode, double coarse_r,
                                          int span)
{
    model.validate();
    cfg.validate();
    if (mode != channel::SensingMode::monostatic)
        throw std::invalid_argument(
            "pn_range_disambiguate: requires a shared transmit/receive oscillator "
            "(monostatic mode)");
    if (span < 1)
        throw std::invalid_argument("pn_range_disambiguate: span must be >= 1");
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;

    const Dominant dom = dominant_echo(y, x, p, cfg, 4, 4);
    CMat a = echo_template(x, p, cfg, dom.tau, dom.nu);
    for (auto& v : a.data)
        v *= dom.alpha;

    double sig2 = 0.0;
    for (std::size_t q = 0; q < a.data.size(); ++q)
        sig2 += std::norm(y.data[q] - a.data[q]);
    sig2 /= double(a.data.size());
    const double thr = 3.0 * std::sqrt(sig2);

    // Phase samples from cells with enough echo energy.
    std::vector<long> idx;
    std::vector<double> xi;
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l) {
            if (std::abs(a(l, j)) < thr)
                continue;
            idx.push_back(pn::cell_index(cfg, l, j));
            xi.push_back(std::arg(y(l, j) / a(l, j)));
        }

    RangeDisambigResult res;
    res.reliable = xi.size() >= std::size_t(n) * m / 2 && xi.size() >= 16;
    if (xi.size() < 2) {
        res.range = coarse_r;
        res.costs.assign(span, std::numeric_limits<double>::infinity());
        return res;
    }

    double mean = 0.0;
    for (double v : xi)
        mean += v;
    mean /= double(xi.size());
    for (double& v : xi)
        v -= mean;

    const long max_k = pn::cell_index(cfg, n - 1, m - 1) - pn::cell_index(cfg, 0, 0);
    std::vector<double> sum(max_k + 1, 0.0);
    std::vector<double> cnt(max_k + 1, 0.0);
    for (std::size_t aa = 0; aa < xi.size(); ++aa)
        for (std::size_t bb = 0; bb <= aa; ++bb) {
            const long k = idx[aa] - idx[bb];
            sum[k] += xi[aa] * xi[bb];
            cnt[k] += 1.0;
        }

    const double r_amb = kSpeedOfLight / (2.0 * cfg.subcarrier_spacing);
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q < span; ++q) {
        const double r_cand = coarse_r + q * r_amb;
        const double tau_cand = 2.0 * r_cand / kSpeedOfLight;
        double num = 0.0, den = 0.0;
        for (long k = 0; k <= max_k; ++k) {
            if (cnt[k] == 0.0)
                continue;
            const double w = (k == 0 ? 1.0 : 2.0) * cnt[k];
            const double emp = sum[k] / cnt[k];
            const double mod = pn::pn_cov_at_lag(model, tau_cand, cfg, k);
            num += w * (emp - mod) * (emp - mod);
            den += w * mod * mod;
        }
        const double cost = den > 0 ? std::sqrt(num / den)
                                    : std::numeric_limits<double>::infinity();
        res.costs.push_back(cost);
        if (cost < best) {
            best = cost;
            res.q = q;
            res.range = r_cand;
        }
    }
    return res;
}

SiNullingResult design_si_nulling(const CMat& h_si, const CMat& f_rf, const CMat& f_bb,
                                  int l_r, bool unit_modulus)
{
    if (h_si.cols != f_rf.rows || f_rf.cols != f_bb.rows)
        throw std::invalid_argument("design_si_nulling: incompatible shapes");
    if (l_r < 1)
        throw std::invalid_argument("design_si_nulling: l_r must be >= 1");
    const long nr = long(h_si.rows);

    const Eigen::MatrixXcd e = to_eigen(h_si) * to_eigen(f_rf) * to_eigen(f_bb);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e, Eigen::ComputeFullU);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    const double tol = std::max(e.rows(), e.cols()) * smax *
                       std::numeric_limits<double>::epsilon();
    long rank = 0;
    for (long i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol)
            ++rank;
    if (nr - rank < l_r)
        throw std::invalid_argument(
            "design_si_nulling: null space dimension " + std::to_string(nr - rank) +
            " < requested combiner size " + std::to_string(l_r));

    const Eigen::MatrixXcd null_basis = svd.matrixU().rightCols(nr - rank);
    Eigen::MatrixXcd w = null_basis.leftCols(l_r);
    const double e_norm = e.norm();

    SiNullingResult res;
    if (!unit_modulus) {
        res.w_rf = from_eigen(w);
        res.residual = (w.adjoint() * e).norm();
        res.rel_residual = e_norm > 0 ? res.residual / e_norm : 0.0;
        return res;
    }

    // Alternate between the null space and the unit-modulus manifold.
    const Eigen::MatrixXcd proj = null_basis * null_basis.adjoint();
    auto phase_only = [](Eigen::MatrixXcd& v) {
        for (long i = 0; i < v.rows(); ++i)
            for (long j = 0; j < v.cols(); ++j) {
                const double mag = std::abs(v(i, j));
                v(i, j) = mag > 0 ? v(i, j) / mag : cplx{1, 0};
            }
    };
    for (int it = 0; it < 200; ++it) {
        phase_only(w);
        w = proj * w;
    }
    phase_only(w);
    res.w_rf = from_eigen(w);
    // Unit-modulus columns have norm sqrt(nr); rescale so the residual is
    // comparable to the orthonormal case.
    res.residual = (w.adjoint() * e).norm() / std::sqrt(double(nr));
    res.rel_residual = e_norm > 0 ? res.residual / e_norm : 0.0;
    return res;
}

std::vector<double> transmit_target_gain(const CMat& f_rf, const CMat& f_bb, double theta,
                                         const ArrayConfig& arrays)
{
    arrays.validate();
    if (f_rf.rows != std::size_t(arrays.n_tx) || f_rf.cols != f_bb.rows)
        throw std::invalid_argument("transmit_target_gain: incompatible shapes");
    const auto a = array_steering(theta, arrays.n_tx, arrays.element_spacing,
                                  arrays.wavelength());
    std::vector<double> g(f_bb.cols, 0.0);
    for (std::size_t s = 0; s < f_bb.cols; ++s) {
        cplx acc{0, 0};
        for (std::size_t i = 0; i < f_rf.rows; ++i) {
            cplx col_i{0, 0};
            for (std::size_t t = 0; t < f_rf.cols; ++t)
                col_i += f_rf(i, t) * f_bb(t, s);
            acc += std::conj(a[i]) * col_i;
        }
        g[s] = std::norm(acc);
    }
    return g;
}

} // namespace isac::enh
