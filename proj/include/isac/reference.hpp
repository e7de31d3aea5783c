/**
 * @file reference.hpp
 * @brief Serial brute-force twins of the hot kernels. Direct summation, no
 *        FFT library, no threading. Kept as the ground truth the tests and
 *        the kernel benchmark compare against.
 */
#pragma once

#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac::reference {

/// Naive O(n^2) DFT, same sign convention as fft::transform.
std::vector<cplx> dft(const std::vector<cplx>& in, int sign);

/// Delay-Doppler map by direct quadruple summation. Matches the layout and
/// normalization of the production map: rows are range bins of width
/// c / (2 pad_n N scs), columns are Doppler bins centered on zero.
CMat rd_map(const CMat& y, const CMat& x, const RMat& p, const FrameConfig& cfg,
            int pad_n, int pad_m);

/// Ambiguity surface |sum_t s(t) conj(s(t - tau)) exp(j 2 pi nu t)| by direct
/// summation over samples, normalized to 1 at (0, 0). Delays are rounded to
/// the sample grid.
RMat ambiguity(const std::vector<cplx>& s, double fs, const std::vector<double>& delays,
               const std::vector<double>& dopplers);

} // namespace isac::reference
