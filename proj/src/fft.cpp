#include "isac/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace isac::fft {

namespace {

std::mutex g_plan_mutex;
std::map<std::pair<int, int>, fftw_plan> g_plans;

fftw_plan get_plan(int n, int sign)
{
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end())
        return it->second;
    // UNALIGNED lets the cached plan run on any caller buffer.
    std::vector<cplx> scratch(n);
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                   reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    g_plans.emplace(key, p);
    return p;
}

} // namespace

void transform(cplx* data, int n, int sign)
{
    if (n <= 1)
        return;
    fftw_plan p = get_plan(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

} // namespace isac::fft
