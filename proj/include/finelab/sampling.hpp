#pragma once

#include <vector>

#include "finelab/geometry.hpp"
#include "finelab/rng.hpp"

namespace finelab {

// Deterministic low-discrepancy point clouds.  Same (seed, n) always gives the
// same points; the seed only rotates the pattern.

inline constexpr double golden_frac = 0.6180339887498948482;

inline double seed_rotation(std::uint64_t seed, std::uint64_t salt) {
    return static_cast<double>(mix64(seed ^ mix64(salt)) >> 11) * 0x1.0p-53;
}

// sunflower spiral filling the open disk
inline std::vector<geom::cpoint> disk_cloud(const geom::disk& d, int n, std::uint64_t seed,
                                            std::uint64_t salt = 0) {
    std::vector<geom::cpoint> pts;
    pts.reserve(n);
    const double rot = seed_rotation(seed, salt);
    for (int j = 0; j < n; ++j) {
        double u = static_cast<double>(j) * golden_frac + rot;
        u -= std::floor(u);
        const double r = d.radius * std::sqrt((j + 0.5) / n);
        pts.push_back(d.center + r * std::polar(1.0, geom::two_pi * u));
    }
    return pts;
}

// equally spaced points on a circle, rotated by the seed
inline std::vector<geom::cpoint> circle_cloud(geom::cpoint center, double radius, int n,
                                              std::uint64_t seed, std::uint64_t salt = 0) {
    std::vector<geom::cpoint> pts;
    pts.reserve(n);
    const double rot = geom::two_pi * seed_rotation(seed, salt);
    for (int j = 0; j < n; ++j)
        pts.push_back(center + radius * std::polar(1.0, rot + geom::two_pi * j / n));
    return pts;
}

// spiral cloud over the closed annulus r0 <= |z - center| <= r1
inline std::vector<geom::cpoint> annulus_cloud(geom::cpoint center, double r0, double r1, int n,
                                               std::uint64_t seed, std::uint64_t salt = 0) {
    std::vector<geom::cpoint> pts;
    pts.reserve(n);
    const double rot = seed_rotation(seed, salt);
    for (int j = 0; j < n; ++j) {
        double u = static_cast<double>(j) * golden_frac + rot;
        u -= std::floor(u);
        const double frac = n > 1 ? static_cast<double>(j) / (n - 1) : 0.5;
        const double r = std::sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * frac);
        pts.push_back(center + r * std::polar(1.0, geom::two_pi * u));
    }
    return pts;
}

}  // namespace finelab
