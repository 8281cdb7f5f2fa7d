#include "lddr/rng.hpp"

#include <cmath>

namespace lddr {

namespace {

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t combine(uint64_t h, uint64_t v) { return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

inline double normal_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

}  // namespace

uint64_t hash_tag(std::string_view tag) {
    // FNV-1a
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t StreamKey::bits(uint64_t a, uint64_t b, uint64_t c, uint64_t d) const {
    uint64_t h = mix64(seed);
    h = combine(h, tag);
    h = combine(h, a);
    h = combine(h, b);
    h = combine(h, c);
    h = combine(h, d);
    return h;
}

double StreamKey::uniform(uint64_t a, uint64_t b, uint64_t c, uint64_t d) const {
    // 53 mantissa bits, shifted into the open interval.
    return (static_cast<double>(bits(a, b, c, d) >> 11) + 0.5) * 0x1.0p-53;
}

double StreamKey::normal(uint64_t a, uint64_t b, uint64_t c, uint64_t d) const {
    return inverse_normal_cdf(uniform(a, b, c, d));
}

double inverse_normal_cdf(double p) {
    // Acklam's rational approximation with two Halley refinement steps.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }

    for (int it = 0; it < 2; ++it) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x -= u / (1 + x * u / 2);
    }
    return x;
}

}  // namespace lddr
