#include "isac/rng.hpp"

namespace isac {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t root, std::uint64_t tag)
{
    return splitmix64(splitmix64(root) ^ splitmix64(tag * 0x9e3779b97f4a7c15ULL + 1));
}

Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

cplx randn_c(Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(2.0));
    return {n(rng), n(rng)};
}

void fill_noise(CMat& z, double var, Rng& rng)
{
    const double s = std::sqrt(var);
    for (auto& v : z.data)
        v = s * randn_c(rng);
}

} // namespace isac
