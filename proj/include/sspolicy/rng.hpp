#pragma once

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace sspolicy {

using Engine = boost::random::mt19937_64;
/// Ziggurat sampler.
using Normal = boost::random::normal_distribution<double>;

/// Independent generator keyed by (seed, path, stream). Two runs that use the
/// same key see the same numbers regardless of how paths are scheduled.
inline Engine make_stream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), stream};
    return Engine(seq);
}

/// Uniform variate in (0,1], safe to pass to log.
inline double open_uniform(Engine& g) {
    return 1.0 - std::generate_canonical<double, 64>(g);
}

}  // namespace sspolicy
