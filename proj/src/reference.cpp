#include "isac/reference.hpp"

#include <cmath>

namespace isac::reference {

std::vector<cplx> dft(const std::vector<cplx>& in, int sign)
{
    const std::size_t n = in.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{0, 0};
        for (std::size_t i = 0; i < n; ++i)
            acc += in[i] * std::polar(1.0, sign * 2.0 * kPi * double(i) * double(k) / double(n));
        out[k] = acc;
    }
    return out;
}

CMat rd_map(const CMat& y, const CMat& x, const RMat& p, const FrameConfig& cfg,
            int pad_n, int pad_m)
{
    const int n = cfg.n_subcarriers;
    const int m = cfg.n_symbols;
    const int nr = pad_n * n;
    const int mv = pad_m * m;

    // Demodulate: unitary DFT over fast time, then matched weighting.
    CMat g(n, m);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < m; ++j) {
            cplx acc{0, 0};
            for (int l = 0; l < n; ++l)
                acc += y(l, j) * std::polar(1.0, -2.0 * kPi * double(k) * double(l) / double(n));
            g(k, j) = acc / std::sqrt(double(n)) * std::sqrt(p(k, j)) * std::conj(x(k, j));
        }

    CMat map(nr, mv);
    for (int r = 0; r < nr; ++r)
        for (int col = 0; col < mv; ++col) {
            const int b = col - mv / 2;
            cplx acc{0, 0};
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < m; ++j)
                    acc += g(k, j) *
                           std::polar(1.0, 2.0 * kPi * double(k) * double(r) / double(nr)) *
                           std::polar(1.0, -2.0 * kPi * double(j) * double(b) / double(mv));
            map(r, col) = acc / std::sqrt(double(n));
        }
    return map;
}

RMat ambiguity(const std::vector<cplx>& s, double fs, const std::vector<double>& delays,
               const std::vector<double>& dopplers)
{
    const long n = static_cast<long>(s.size());
    double e = 0.0;
    for (const auto& v : s)
        e += std::norm(v);
    if (e == 0.0)
        throw std::invalid_argument("ambiguity: empty or all-zero stream");

    RMat af(delays.size(), dopplers.size());
    for (std::size_t di = 0; di < delays.size(); ++di) {
        const long shift = std::lround(delays[di] * fs);
        if (std::labs(shift) >= n)
            throw std::invalid_argument("ambiguity: delay beyond stream support");
        for (std::size_t vi = 0; vi < dopplers.size(); ++vi) {
            cplx acc{0, 0};
            for (long t = 0; t < n; ++t) {
                const long u = t - shift;
                if (u < 0 || u >= n)
                    continue;
                acc += s[t] * std::conj(s[u]) *
                       std::polar(1.0, 2.0 * kPi * dopplers[vi] * double(t) / fs);
            }
            af(di, vi) = std::abs(acc) / e;
        }
    }
    return af;
}

} // namespace isac::reference
