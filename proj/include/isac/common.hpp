/**
 * @file common.hpp
 * @brief Shared scalar types, constants and dense grid containers.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace isac {

using cplx = std::complex<double>;

// Rounded radar constant, used consistently for every delay <-> range
// conversion so the classic desk formulas (c/2B, lambda = c/fc, ...) come out
// exact.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Dense row-major matrix. Grids are small (desk scale), so no view machinery.
template <typename T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    T* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const T* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
};

using CMat = Mat<cplx>;
using RMat = Mat<double>;

inline double sq_norm(const CMat& a)
{
    double s = 0.0;
    for (const auto& v : a.data)
        s += std::norm(v);
    return s;
}

inline double frob_norm(const CMat& a) { return std::sqrt(sq_norm(a)); }

inline double pow_db(double p) { return 10.0 * std::log10(p); }
inline double mag_db(double m) { return 20.0 * std::log10(m); }
inline double db_to_pow(double db) { return std::pow(10.0, db / 10.0); }

} // namespace isac
