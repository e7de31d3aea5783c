/**
 * @file steering.hpp
 * @brief Phase-ramp primitives: delay/Doppler/array steering vectors, the
 *        receive-chain frequency-offset diagonal, and the worst-case
 *        intra-symbol phase excursion figure.
 */
#pragma once

#include <vector>

#include "isac/common.hpp"
#include "isac/types.hpp"

namespace isac {

/// [b(tau)]_n = exp(-j 2 pi n scs tau), n = 0..n_sub-1.
std::vector<cplx> freq_steering(double tau, int n_sub, double scs);

/// [c(nu)]_m = exp(+j 2 pi m t_sym nu), m = 0..n_sym-1.
std::vector<cplx> time_steering(double nu, int n_sym, double t_sym);

/// Broadside-referenced ULA response, [a]_i = exp(j 2 pi p_i sin(angle) / lambda)
/// with p_i = i * spacing.
std::vector<cplx> array_steering(double angle, int n_elem, double spacing, double lambda);

/// Same, with explicit element positions (m).
std::vector<cplx> array_steering(double angle, const std::vector<double>& positions,
                                 double lambda);

/// Diagonal of D(nu): d_l = exp(j 2 pi T l nu / n_sub), l = 0..n_sub-1.
/// Applied to fast-time rows, this is a frequency offset of nu Hz.
std::vector<cplx> cfo_phase(double nu, int n_sub, double elem_duration);

/// Peak intra-symbol phase excursion 2 pi T nu for a round-trip Doppler at
/// speed v: 4 pi v fc / (c scs). Gauges how much inter-carrier leakage a
/// moving target produces.
double max_phase_excursion(double speed, double carrier_freq, double scs);

} // namespace isac
