#include "eikorec/prng.hpp"

#include <cmath>

namespace eikorec {

std::uint64_t splitmix64_mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t state = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    return static_cast<double>(splitmix64_mix(state) >> 11) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t index) {
    double u1 = uniform01(seed, 2 * index);
    double u2 = uniform01(seed, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace eikorec
