/**
 * @file fft.hpp
 * @brief Thin FFTW wrapper with a process-wide plan cache. Unnormalized
 *        transforms; callers apply their own scaling. Plan creation is
 *        serialized, execution is safe from parallel regions.
 */
#pragma once

#include <vector>

#include "isac/common.hpp"

namespace isac::fft {

/// In-place complex transform, FFTW sign convention:
/// sign = -1: X_k = sum_n x_n exp(-j 2 pi n k / N)
/// sign = +1: X_k = sum_n x_n exp(+j 2 pi n k / N)
void transform(cplx* data, int n, int sign);

inline void forward(std::vector<cplx>& v) { transform(v.data(), static_cast<int>(v.size()), -1); }
inline void backward(std::vector<cplx>& v) { transform(v.data(), static_cast<int>(v.size()), +1); }

} // namespace isac::fft
