#pragma once

#include <cstdint>
#include <string_view>

namespace lddr {

// Counter-based random streams: every variate is a pure function of
// (seed, stream tag, scenario, stage, product, draw). Sampling is therefore
// reproducible across runs and thread counts, and any variate can be
// regenerated in isolation.

uint64_t hash_tag(std::string_view tag);

struct StreamKey {
    uint64_t seed = 0;
    uint64_t tag = 0;

    StreamKey() = default;
    StreamKey(uint64_t seed_, std::string_view tag_) : seed(seed_), tag(hash_tag(tag_)) {}
    StreamKey(uint64_t seed_, uint64_t tagHash) : seed(seed_), tag(tagHash) {}

    // Uniform on (0,1), open at both ends.
    double uniform(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) const;
    // Standard normal via inverse CDF (no state, no rejection).
    double normal(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) const;
    uint64_t bits(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) const;
};

// Inverse standard normal CDF, |error| < 1e-13 after refinement.
double inverse_normal_cdf(double p);

}  // namespace lddr
