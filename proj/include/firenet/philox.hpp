#pragma once

#include <array>
#include <cstdint>

namespace firenet {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
// each 128-bit counter/64-bit key pair maps to four independent 32-bit
// words, so any (seed, index...) tuple addresses its own stream and
// parallel evaluation is bit-identical to serial.
//
// Stream-splitting convention used throughout this project:
//   key     = (lo32(seed), hi32(seed))
//   counter = (sample index, entry index, draw slot, domain)
// where "entry index" is n * K + k for matrix entry (n, k), "draw slot"
// distinguishes multiple uniforms consumed by one entry (e.g. the
// Bernoulli + geometric stages), and "domain" separates unrelated uses of
// the same seed (0 = ensemble sampling, 1 = scenario generation).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Uniform double in the open interval (0, 1) derived from one Philox block.
double counter_uniform(std::uint64_t seed, std::uint32_t sample, std::uint32_t entry,
                       std::uint32_t slot, std::uint32_t domain = 0);

namespace rng_domain {
inline constexpr std::uint32_t kEnsembleSampling = 0;
inline constexpr std::uint32_t kScenarioGeneration = 1;
}  // namespace rng_domain

}  // namespace firenet
