/**
 * @file rng.hpp
 * @brief Seeded random streams. Every stochastic quantity draws from a
 *        substream derived from (root seed, tag) so that adding or removing
 *        one randomized component never shifts the draws of another.
 */
#pragma once

#include <cstdint>
#include <random>

#include "isac/common.hpp"

namespace isac {

using Rng = std::mt19937_64;

/// SplitMix64 step, used as a seed mixer.
std::uint64_t splitmix64(std::uint64_t x);

/// Independent substream seed for a given purpose tag.
std::uint64_t substream(std::uint64_t root, std::uint64_t tag);

Rng make_rng(std::uint64_t seed);

/// Standard circularly-symmetric complex Gaussian, CN(0, 1).
cplx randn_c(Rng& rng);

/// Fill with i.i.d. CN(0, var) entries.
void fill_noise(CMat& z, double var, Rng& rng);

} // namespace isac
