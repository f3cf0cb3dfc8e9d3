#ifndef EIKOREC_PRNG_HPP
#define EIKOREC_PRNG_HPP

#include <cstdint>

namespace eikorec {

// Counter-based generator used for all synthetic randomness, so that a
// draw depends only on (seed, counter):
//   mix(seed, k)    = SplitMix64 finalizer of (seed + (k + 1) * 0x9E3779B97F4A7C15)
//   uniform(seed,k) = (mix(seed,k) >> 11) * 2^-53            in [0, 1)
//   normal(seed,i)  = sqrt(-2 ln(1 - uniform(seed,2i))) * cos(2 pi uniform(seed,2i+1))
// The nodal noise field draws normal(seed, vertex_index).
std::uint64_t splitmix64_mix(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t counter);
double standard_normal(std::uint64_t seed, std::uint64_t index);

} // namespace eikorec

#endif
